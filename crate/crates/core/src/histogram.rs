//! Phase histograms over `N` bins with count, mean or variance aggregation.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::compute_phase;
use crate::series::{EventSeries, PeriodLength};

/// Bin count used when the caller does not choose one.
pub const DEFAULT_BIN_COUNT: usize = 25;

/// What value each phase bin carries.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum BinAggregation {
    #[default]
    Count,
    Mean(String),
    Variance(String),
}

impl BinAggregation {
    pub fn attribute(&self) -> Option<&str> {
        match self {
            BinAggregation::Count => None,
            BinAggregation::Mean(a) | BinAggregation::Variance(a) => Some(a),
        }
    }

    /// Ensures the referenced attribute exists in `series`.
    pub fn check(&self, series: &EventSeries) -> Result<()> {
        if let Some(name) = self.attribute() {
            series.attribute(name)?;
        }
        Ok(())
    }
}

impl fmt::Display for BinAggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BinAggregation::Count => f.write_str("count"),
            BinAggregation::Mean(a) => write!(f, "mean:{a}"),
            BinAggregation::Variance(a) => write!(f, "variance:{a}"),
        }
    }
}

impl FromStr for BinAggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidAggregation(s.to_string());
        match s.split_once(':') {
            None if s == "count" => Ok(BinAggregation::Count),
            Some(("mean", a)) if !a.is_empty() => Ok(BinAggregation::Mean(a.to_string())),
            Some(("variance", a)) if !a.is_empty() => Ok(BinAggregation::Variance(a.to_string())),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for BinAggregation {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<BinAggregation> for String {
    fn from(value: BinAggregation) -> Self {
        value.to_string()
    }
}

/// Aggregated bin values for one period length.
///
/// `counts` always holds the raw event counts. `bins` holds the aggregated
/// values; `None` marks a mean/variance bin without events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseHistogram {
    bins: Vec<Option<f64>>,
    counts: Vec<u64>,
    aggregation: BinAggregation,
}

impl PhaseHistogram {
    /// A count-mode histogram from raw counts.
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        check_bin_count(counts.len())?;
        let bins = counts.iter().map(|&c| Some(c as f64)).collect();
        Ok(Self {
            bins,
            counts,
            aggregation: BinAggregation::Count,
        })
    }

    pub(crate) fn from_accumulators(accs: &[BinAccumulator], aggregation: BinAggregation) -> Self {
        let counts = accs.iter().map(|a| a.count).collect();
        let bins = accs.iter().map(|a| a.value(&aggregation)).collect();
        Self {
            bins,
            counts,
            aggregation,
        }
    }

    pub fn bins(&self) -> &[Option<f64>] {
        &self.bins
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn aggregation(&self) -> &BinAggregation {
        &self.aggregation
    }
}

pub(crate) fn check_bin_count(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::InvalidBinCount(n))
    } else {
        Ok(())
    }
}

/// Bin index of a phase; half-open bins, with spill at `2π` clamped to `N − 1`.
#[inline]
pub fn bin_index(phase: f64, bin_count: usize) -> usize {
    let idx = (phase / TAU * bin_count as f64) as usize;
    idx.min(bin_count - 1)
}

/// Running count, mean and squared deviation (Welford) for one bin.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct BinAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl BinAccumulator {
    #[inline]
    pub(crate) fn count(&self) -> u64 {
        self.count
    }

    #[inline]
    pub(crate) fn push_count(&mut self) {
        self.count += 1;
    }

    #[inline]
    pub(crate) fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub(crate) fn value(&self, aggregation: &BinAggregation) -> Option<f64> {
        match aggregation {
            BinAggregation::Count => Some(self.count as f64),
            _ if self.count == 0 => None,
            BinAggregation::Mean(_) => Some(self.mean),
            BinAggregation::Variance(_) => Some((self.m2 / self.count as f64).max(0.0)),
        }
    }
}

/// Folds `series` at `tau` and aggregates into `bin_count` phase bins.
///
/// Variance is the population variance of the attribute within each bin.
pub fn build_phase_histogram(
    series: &EventSeries,
    tau: PeriodLength,
    bin_count: usize,
    aggregation: &BinAggregation,
) -> Result<PhaseHistogram> {
    check_bin_count(bin_count)?;
    series.check_period(tau)?;
    let values = match aggregation.attribute() {
        Some(name) => Some(series.attribute(name)?),
        None => None,
    };
    let t0 = series.t_start();
    let mut accs = vec![BinAccumulator::default(); bin_count];
    match values {
        None => {
            for &t in series.events() {
                accs[bin_index(compute_phase(t, tau, t0), bin_count)].push_count();
            }
        }
        Some(values) => {
            for (&t, &x) in series.events().iter().zip(values) {
                accs[bin_index(compute_phase(t, tau, t0), bin_count)].push(x);
            }
        }
    }
    Ok(PhaseHistogram::from_accumulators(
        &accs,
        aggregation.clone(),
    ))
}
