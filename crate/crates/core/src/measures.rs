//! Quality measures: Shannon entropy of the phase histogram and vector
//! strength (mean resultant length) of the raw event phases.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::{
    bin_index, check_bin_count, BinAccumulator, BinAggregation, PhaseHistogram,
};
use crate::phase::compute_phase;
use crate::series::{EventSeries, PeriodLength};

/// Entropy and vector strength for one period length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityMeasures {
    /// Shannon entropy of the count distribution, in bits.
    pub entropy_bits: f64,
    /// `1 − H / log2(N)`, clamped to `[0, 1]`; 1 is a single spike.
    pub entropy_interest: f64,
    pub vector_strength: f64,
    /// Direction of the phase barycenter, radians in `[0, 2π)`.
    pub mean_direction: f64,
}

/// Entropy of a histogram in bits plus the normalized interest value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropy {
    pub bits: f64,
    pub interest: f64,
}

/// Entropy over the event counts of `hist`.
///
/// An all-zero histogram counts as uniform (`H = log2 N`, interest 0).
pub fn shannon_entropy(hist: &PhaseHistogram) -> Entropy {
    entropy_of_counts(hist.counts())
}

pub(crate) fn entropy_of_counts(counts: &[u64]) -> Entropy {
    let max_bits = (counts.len() as f64).log2();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Entropy {
            bits: max_bits,
            interest: 0.0,
        };
    }
    let n = total as f64;
    let bits = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0);
    let interest = (1.0 - bits / max_bits).clamp(0.0, 1.0);
    Entropy { bits, interest }
}

/// Vector strength and mean direction of a set of phases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resultant {
    pub strength: f64,
    pub direction: f64,
}

/// Mean resultant of unit vectors at the given phases.
pub fn resultant_of_phases<I>(phases: I) -> Resultant
where
    I: IntoIterator<Item = f64>,
{
    let mut n = 0usize;
    let (mut c, mut s) = (0.0f64, 0.0f64);
    for phi in phases {
        let (sin, cos) = phi.sin_cos();
        c += cos;
        s += sin;
        n += 1;
    }
    finish_resultant(c, s, n)
}

fn finish_resultant(c: f64, s: f64, n: usize) -> Resultant {
    if n == 0 {
        return Resultant {
            strength: 0.0,
            direction: 0.0,
        };
    }
    let (x, y) = (c / n as f64, s / n as f64);
    let strength = x.hypot(y).min(1.0);
    let mut direction = y.atan2(x);
    if direction < 0.0 {
        direction += TAU;
    }
    if direction >= TAU {
        direction = 0.0;
    }
    Resultant {
        strength,
        direction,
    }
}

/// Vector strength of the raw event phases of `series` at `tau`.
pub fn vector_strength(series: &EventSeries, tau: PeriodLength) -> Result<Resultant> {
    series.check_period(tau)?;
    let t0 = series.t_start();
    Ok(resultant_of_phases(
        series.events().iter().map(|&t| compute_phase(t, tau, t0)),
    ))
}

/// Histogram and measures for one period length in a single pass.
pub fn analyze_period(
    series: &EventSeries,
    tau: PeriodLength,
    bin_count: usize,
    aggregation: &BinAggregation,
) -> Result<(PhaseHistogram, QualityMeasures)> {
    check_bin_count(bin_count)?;
    series.check_period(tau)?;
    let values = match aggregation.attribute() {
        Some(name) => Some(series.attribute(name)?),
        None => None,
    };
    let t0 = series.t_start();
    let mut accs = vec![BinAccumulator::default(); bin_count];
    let (mut c, mut s) = (0.0f64, 0.0f64);
    for (j, &t) in series.events().iter().enumerate() {
        let phi = compute_phase(t, tau, t0);
        let (sin, cos) = phi.sin_cos();
        c += cos;
        s += sin;
        let acc = &mut accs[bin_index(phi, bin_count)];
        match values {
            Some(v) => acc.push(v[j]),
            None => acc.push_count(),
        }
    }
    let hist = PhaseHistogram::from_accumulators(&accs, aggregation.clone());
    let entropy = shannon_entropy(&hist);
    let r = finish_resultant(c, s, series.len());
    Ok((
        hist,
        QualityMeasures {
            entropy_bits: entropy.bits,
            entropy_interest: entropy.interest,
            vector_strength: r.strength,
            mean_direction: r.direction,
        },
    ))
}

/// Which quality measure drives ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Entropy,
    #[default]
    VectorStrength,
}

impl Measure {
    /// Interest score in `[0, 1]`, higher is more interesting.
    pub fn score(self, m: &QualityMeasures) -> f64 {
        match self {
            Measure::Entropy => m.entropy_interest,
            Measure::VectorStrength => m.vector_strength,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Measure::Entropy => "entropy",
            Measure::VectorStrength => "vector-strength",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entropy" => Ok(Measure::Entropy),
            "vector-strength" | "vector_strength" | "vs" => Ok(Measure::VectorStrength),
            other => Err(Error::UnknownMeasure(other.to_string())),
        }
    }
}
