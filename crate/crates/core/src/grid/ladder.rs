use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{DAY, HOUR, MINUTE, SECOND, YEAR};

/// Lower bound of the ladder when none is given (one minute).
pub const DEFAULT_LOWER_BOUND: f64 = 60.0;
/// Growth ratio of the geometric fill.
pub const DEFAULT_GROWTH: f64 = 1.01;

const DEDUP_TOLERANCE: f64 = 1e-9;

/// Unit multiples sampled on the ladder: (unit, largest multiple).
const UNIT_MULTIPLES: [(f64, u32); 5] = [
    (SECOND, 59),
    (MINUTE, 59),
    (HOUR, 23),
    (DAY, 364),
    (YEAR, 200),
];

/// Strictly increasing candidate period lengths in `[lower_bound, upper_bound]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleLadder {
    lower_bound: f64,
    upper_bound: f64,
    samples: Vec<f64>,
}

impl SampleLadder {
    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Ladder with the default geometric growth ratio.
pub fn build_ladder(extent: f64, lower_bound: f64) -> Result<SampleLadder> {
    build_ladder_with_growth(extent, lower_bound, DEFAULT_GROWTH)
}

/// Unit multiples (seconds, minutes, hours, days, years) in range, merged with
/// the geometric series `lower_bound · growth^k` up to `extent`.
pub fn build_ladder_with_growth(
    extent: f64,
    lower_bound: f64,
    growth: f64,
) -> Result<SampleLadder> {
    if !(growth.is_finite() && growth > 1.0) {
        return Err(Error::InvalidGrowth(growth));
    }
    if !(lower_bound.is_finite() && lower_bound > 0.0) {
        return Err(Error::InvalidPeriod(lower_bound));
    }
    if !(extent.is_finite() && extent > lower_bound) {
        return Err(Error::EmptyLadder {
            extent,
            lower_bound,
        });
    }

    // (value, is_unit); unit samples win ties against geometric ones.
    let mut candidates: Vec<(f64, bool)> = Vec::new();
    for (unit, max) in UNIT_MULTIPLES {
        for k in 1..=max {
            let v = unit * k as f64;
            if v > extent {
                break;
            }
            if v >= lower_bound {
                candidates.push((v, true));
            }
        }
    }
    let mut k = 0i32;
    loop {
        let v = lower_bound * growth.powi(k);
        if v > extent {
            break;
        }
        candidates.push((v, false));
        k += 1;
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));

    let mut merged: Vec<(f64, bool)> = Vec::with_capacity(candidates.len());
    for (v, is_unit) in candidates {
        match merged.last_mut() {
            Some(last) if (v - last.0).abs() <= DEDUP_TOLERANCE * v.abs().max(last.0.abs()) => {
                if is_unit && !last.1 {
                    *last = (v, true);
                }
            }
            _ => merged.push((v, is_unit)),
        }
    }

    Ok(SampleLadder {
        lower_bound,
        upper_bound: extent,
        samples: merged.into_iter().map(|(v, _)| v).collect(),
    })
}
