//! Ranked period lengths for a dataset, as JSON or CSV.

use std::io::Write;

use anyhow::Result;
use phasefold_core::{Measure, PeriodGrid, PeriodLength};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub id: String,
    pub name: String,
    pub event_count: usize,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub bin_count: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub growth: f64,
    pub ladder_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPeriod {
    pub rank: usize,
    pub tau: f64,
    pub score: f64,
    pub entropy_interest: f64,
    pub vector_strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub measure: Measure,
    pub top: Vec<RankedPeriod>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub dataset: DatasetInfo,
    pub parameters: Parameters,
    pub rankings: Vec<Ranking>,
}

pub fn ranking(grid: &PeriodGrid, measure: Measure, k: usize) -> Ranking {
    let top = grid
        .top_ticks(measure, k)
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let tau = PeriodLength::new(t.tau).expect("grid taus are valid");
            let row = &grid.rows()[grid.position(tau).expect("tick comes from the grid")];
            RankedPeriod {
                rank: i + 1,
                tau: t.tau,
                score: t.score,
                entropy_interest: row.measures.entropy_interest,
                vector_strength: row.measures.vector_strength,
            }
        })
        .collect();
    Ranking { measure, top }
}

impl RankReport {
    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        Ok(())
    }

    /// One line per ranked period: `measure,rank,tau,score,entropy_interest,vector_strength`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "measure",
            "rank",
            "tau",
            "score",
            "entropy_interest",
            "vector_strength",
        ])?;
        for r in &self.rankings {
            for p in &r.top {
                w.write_record([
                    r.measure.as_str().to_string(),
                    p.rank.to_string(),
                    p.tau.to_string(),
                    p.score.to_string(),
                    p.entropy_interest.to_string(),
                    p.vector_strength.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}
