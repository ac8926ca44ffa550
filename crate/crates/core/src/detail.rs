//! Per-period detail matrices: one row per period, one column per phase bin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::{bin_index, check_bin_count, BinAccumulator, BinAggregation};
use crate::phase::compute_phase;
use crate::series::{EventSeries, PeriodLength};

/// Default upper bound on detail-matrix rows.
pub const DEFAULT_MAX_ROWS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailMatrix {
    pub tau: PeriodLength,
    pub aggregation: BinAggregation,
    /// Aggregated value per (period, bin); `None` marks an empty mean/variance cell.
    pub rows: Vec<Vec<Option<f64>>>,
    /// Raw event count per (period, bin).
    pub counts: Vec<Vec<u64>>,
}

impl DetailMatrix {
    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn bin_count(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    /// Column-wise sums of the count rows.
    pub fn column_counts(&self) -> Vec<u64> {
        let mut sums = vec![0u64; self.bin_count()];
        for row in &self.counts {
            for (s, c) in sums.iter_mut().zip(row) {
                *s += c;
            }
        }
        sums
    }
}

/// Number of rows `ceil(extent / tau)`, at least one.
pub fn detail_row_count(series: &EventSeries, tau: PeriodLength) -> usize {
    let rows = (series.extent() / tau.seconds()).ceil();
    if rows < 1.0 {
        1
    } else if rows >= usize::MAX as f64 {
        usize::MAX
    } else {
        rows as usize
    }
}

/// Lays the events out row by row, one row per period starting at `t_start`.
///
/// An event exactly at `t_end` on a period boundary goes to the last row.
pub fn detail_matrix(
    series: &EventSeries,
    tau: PeriodLength,
    bin_count: usize,
    aggregation: &BinAggregation,
    max_rows: usize,
) -> Result<DetailMatrix> {
    check_bin_count(bin_count)?;
    series.check_period(tau)?;
    let values = match aggregation.attribute() {
        Some(name) => Some(series.attribute(name)?),
        None => None,
    };
    let row_count = detail_row_count(series, tau);
    if row_count > max_rows {
        return Err(Error::TooManyRows {
            rows: row_count,
            cap: max_rows,
        });
    }
    let t0 = series.t_start();
    let mut cells = vec![vec![BinAccumulator::default(); bin_count]; row_count];
    for (j, &t) in series.events().iter().enumerate() {
        let row = (((t - t0) / tau.seconds()).floor().max(0.0) as usize).min(row_count - 1);
        let col = bin_index(compute_phase(t, tau, t0), bin_count);
        let acc = &mut cells[row][col];
        match values {
            Some(v) => acc.push(v[j]),
            None => acc.push_count(),
        }
    }
    let rows = cells
        .iter()
        .map(|r| r.iter().map(|a| a.value(aggregation)).collect())
        .collect();
    let counts = cells
        .iter()
        .map(|r| r.iter().map(BinAccumulator::count).collect())
        .collect();
    Ok(DetailMatrix {
        tau,
        aggregation: aggregation.clone(),
        rows,
        counts,
    })
}
