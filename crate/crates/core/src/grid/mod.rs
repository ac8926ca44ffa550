//! The precomputed exploration substrate: one row of histogram and quality
//! measures per sampled period length.

mod cache;
mod ladder;

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use cache::{
    read_grid_cache, write_grid_cache, CacheError, GridCacheKey, CACHE_FORMAT, CACHE_VERSION,
};
pub use ladder::{
    build_ladder, build_ladder_with_growth, SampleLadder, DEFAULT_GROWTH, DEFAULT_LOWER_BOUND,
};

use crate::error::{Error, Result};
use crate::histogram::{check_bin_count, BinAggregation, PhaseHistogram};
use crate::measures::{analyze_period, Measure, QualityMeasures};
use crate::series::{EventSeries, PeriodLength};

/// Context rows shown above and below the current row by default.
pub const DEFAULT_CONTEXT_ROWS: usize = 30;

const MATCH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Ladder,
    AdHoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub tau: PeriodLength,
    pub histogram: PhaseHistogram,
    pub measures: QualityMeasures,
    pub provenance: Provenance,
}

/// Computes a single grid row for `tau`.
pub fn grid_row(
    series: &EventSeries,
    tau: PeriodLength,
    bin_count: usize,
    aggregation: &BinAggregation,
    provenance: Provenance,
) -> Result<GridRow> {
    let (histogram, measures) = analyze_period(series, tau, bin_count, aggregation)?;
    Ok(GridRow {
        tau,
        histogram,
        measures,
        provenance,
    })
}

/// Rows sorted strictly ascending by period length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodGrid {
    rows: Vec<GridRow>,
    bin_count: usize,
    aggregation: BinAggregation,
    lower_bound: f64,
    upper_bound: f64,
}

/// A slice of consecutive grid rows centered on the requested period length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Window {
    pub rows: Vec<GridRow>,
    /// Index of the current row within `rows`.
    pub center: usize,
}

impl Window {
    pub fn center_row(&self) -> &GridRow {
        &self.rows[self.center]
    }
}

/// A period length highlighted on the slider.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    pub tau: f64,
    pub score: f64,
}

/// Precomputes one row per ladder sample, in parallel.
pub fn precompute_grid(
    series: &EventSeries,
    ladder: &SampleLadder,
    bin_count: usize,
    aggregation: &BinAggregation,
) -> Result<PeriodGrid> {
    precompute_grid_with_progress(series, ladder, bin_count, aggregation, &AtomicUsize::new(0))
}

/// As [`precompute_grid`], bumping `progress` once per finished row.
pub fn precompute_grid_with_progress(
    series: &EventSeries,
    ladder: &SampleLadder,
    bin_count: usize,
    aggregation: &BinAggregation,
    progress: &AtomicUsize,
) -> Result<PeriodGrid> {
    check_bin_count(bin_count)?;
    aggregation.check(series)?;
    let rows = ladder
        .samples()
        .par_iter()
        .map(|&tau| {
            let row = grid_row(
                series,
                PeriodLength::new(tau)?,
                bin_count,
                aggregation,
                Provenance::Ladder,
            );
            progress.fetch_add(1, Ordering::Relaxed);
            row
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PeriodGrid {
        rows,
        bin_count,
        aggregation: aggregation.clone(),
        lower_bound: ladder.lower_bound(),
        upper_bound: ladder.upper_bound(),
    })
}

fn same_tau(a: f64, b: f64) -> bool {
    (a - b).abs() <= MATCH_TOLERANCE * a.abs().max(b.abs())
}

impl PeriodGrid {
    /// Reassembles a grid from stored rows, checking ordering and shape.
    pub fn from_parts(
        rows: Vec<GridRow>,
        bin_count: usize,
        aggregation: BinAggregation,
        lower_bound: f64,
        upper_bound: f64,
    ) -> Result<Self> {
        check_bin_count(bin_count)?;
        if !(lower_bound > 0.0 && upper_bound > lower_bound) {
            return Err(Error::InvalidArgument(format!(
                "grid bounds [{lower_bound}, {upper_bound}] are not a valid range"
            )));
        }
        if rows.windows(2).any(|w| {
            w[0].tau.seconds().partial_cmp(&w[1].tau.seconds()) != Some(std::cmp::Ordering::Less)
        }) {
            return Err(Error::InvalidArgument(
                "grid rows must be strictly ascending".into(),
            ));
        }
        if rows.iter().any(|r| r.histogram.bin_count() != bin_count) {
            return Err(Error::InvalidArgument(
                "grid row with mismatching bin count".into(),
            ));
        }
        Ok(Self {
            rows,
            bin_count,
            aggregation,
            lower_bound,
            upper_bound,
        })
    }

    pub fn rows(&self) -> &[GridRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    pub fn aggregation(&self) -> &BinAggregation {
        &self.aggregation
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    /// Errors unless `tau` lies in `[lower_bound, upper_bound]`.
    pub fn check_range(&self, tau: PeriodLength) -> Result<()> {
        let t = tau.seconds();
        let slack = MATCH_TOLERANCE * t;
        if t + slack < self.lower_bound || t - slack > self.upper_bound {
            return Err(Error::PeriodOutOfRange {
                tau: t,
                lower: self.lower_bound,
                upper: self.upper_bound,
            });
        }
        Ok(())
    }

    /// Index of the row matching `tau` to within a relative 1e-9.
    pub fn position(&self, tau: PeriodLength) -> Option<usize> {
        let t = tau.seconds();
        let idx = self.rows.partition_point(|r| r.tau.seconds() < t);
        [idx.checked_sub(1), Some(idx)]
            .into_iter()
            .flatten()
            .filter(|&i| i < self.rows.len())
            .find(|&i| same_tau(self.rows[i].tau.seconds(), t))
    }

    /// Inserts an ad-hoc row for `tau` unless one already matches; returns its index.
    pub fn insert_ad_hoc(&mut self, series: &EventSeries, tau: PeriodLength) -> Result<usize> {
        self.check_range(tau)?;
        if let Some(i) = self.position(tau) {
            return Ok(i);
        }
        let row = grid_row(
            series,
            tau,
            self.bin_count,
            &self.aggregation,
            Provenance::AdHoc,
        )?;
        let idx = self
            .rows
            .partition_point(|r| r.tau.seconds() < tau.seconds());
        self.rows.insert(idx, row);
        Ok(idx)
    }

    /// Up to `context_rows` rows on each side of row `center`, truncated at the edges.
    pub fn window_at(&self, center: usize, context_rows: usize) -> Window {
        let start = center.saturating_sub(context_rows);
        let end = (center + context_rows + 1).min(self.rows.len());
        Window {
            rows: self.rows[start..end].to_vec(),
            center: center - start,
        }
    }

    /// Window centered on `tau`, inserting an ad-hoc row when `tau` is not sampled.
    pub fn neighborhood(
        &mut self,
        series: &EventSeries,
        tau: PeriodLength,
        context_rows: usize,
    ) -> Result<Window> {
        if context_rows == 0 {
            return Err(Error::InvalidArgument(
                "context rows must be at least 1".into(),
            ));
        }
        let center = self.insert_ad_hoc(series, tau)?;
        Ok(self.window_at(center, context_rows))
    }

    /// The `k` period lengths with the highest score; ties go to the smaller period.
    pub fn top_ticks(&self, measure: Measure, k: usize) -> Vec<Tick> {
        let mut ticks: Vec<Tick> = self
            .rows
            .iter()
            .map(|r| Tick {
                tau: r.tau.seconds(),
                score: measure.score(&r.measures),
            })
            .collect();
        ticks.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.tau.total_cmp(&b.tau)));
        ticks.truncate(k);
        ticks
    }
}
