//! Grid export: long-format bin table plus a per-row measures table.

use std::io::Write;

use anyhow::Result;
use phasefold_core::PeriodGrid;

/// Writes `tau,bin_index,value,count`; an empty `value` marks an empty mean/variance bin.
pub fn write_bins<W: Write>(grid: &PeriodGrid, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tau", "bin_index", "value", "count"])?;
    for row in grid.rows() {
        let tau = row.tau.seconds().to_string();
        for (i, (v, c)) in row
            .histogram
            .bins()
            .iter()
            .zip(row.histogram.counts())
            .enumerate()
        {
            let value = v.map(|x| x.to_string()).unwrap_or_default();
            w.write_record([tau.as_str(), &i.to_string(), &value, &c.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_measures<W: Write>(grid: &PeriodGrid, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "tau",
        "entropy_bits",
        "entropy_interest",
        "vector_strength",
        "mean_direction",
        "provenance",
    ])?;
    for row in grid.rows() {
        let m = &row.measures;
        let provenance = match row.provenance {
            phasefold_core::Provenance::Ladder => "ladder",
            phasefold_core::Provenance::AdHoc => "ad-hoc",
        };
        w.write_record([
            row.tau.seconds().to_string(),
            m.entropy_bits.to_string(),
            m.entropy_interest.to_string(),
            m.vector_strength.to_string(),
            m.mean_direction.to_string(),
            provenance.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
