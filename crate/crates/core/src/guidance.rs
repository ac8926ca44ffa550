//! On-the-fly suggestions of better period lengths at rational multiples of
//! the current one.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::DEFAULT_LOWER_BOUND;
use crate::histogram::{BinAggregation, PhaseHistogram, DEFAULT_BIN_COUNT};
use crate::measures::{analyze_period, Measure};
use crate::series::{EventSeries, PeriodLength};

pub const DEFAULT_MAX_DENOMINATOR: u32 = 5;
pub const DEFAULT_MAX_MULTIPLE: u32 = 4;
pub const DEFAULT_SUGGESTION_COUNT: usize = 5;

/// A reduced positive fraction `num / den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: u32,
    den: u32,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Rational {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidArgument(format!(
                "factor {num}/{den} must be positive"
            )));
        }
        let g = gcd(num, den);
        Ok(Self {
            num: num / g,
            den: den / g,
        })
    }

    pub fn integer(n: u32) -> Result<Self> {
        Self::new(n, 1)
    }

    pub fn num(self) -> u32 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_one(self) -> bool {
        self.num == self.den
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u64 * other.den as u64).cmp(&(other.num as u64 * self.den as u64))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `"k/n"` for fractions, `"m"` for integers.
impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Sorted, deduplicated factors relative to the current period length; never 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorSet {
    factors: Vec<Rational>,
}

impl FactorSet {
    pub fn factors(&self) -> &[Rational] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

impl Default for FactorSet {
    fn default() -> Self {
        candidate_factors(DEFAULT_MAX_DENOMINATOR, DEFAULT_MAX_MULTIPLE)
            .expect("default factor bounds are valid")
    }
}

/// Fractions `k/n` for `n ∈ 2..=n_max`, `k ∈ 1..=2n−1`, plus multiples
/// `2..=m_max`, reduced and deduplicated, excluding 1.
pub fn candidate_factors(n_max: u32, m_max: u32) -> Result<FactorSet> {
    if n_max < 2 || m_max < 2 {
        return Err(Error::InvalidArgument(format!(
            "factor bounds n_max={n_max}, m_max={m_max} must both be at least 2"
        )));
    }
    let mut factors = Vec::new();
    for n in 2..=n_max {
        for k in 1..=(2 * n - 1) {
            factors.push(Rational::new(k, n)?);
        }
    }
    for m in 2..=m_max {
        factors.push(Rational::integer(m)?);
    }
    factors.retain(|f| !f.is_one());
    factors.sort();
    factors.dedup();
    Ok(FactorSet { factors })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Suggestion {
    pub tau: PeriodLength,
    pub factor: Rational,
    pub score: f64,
    pub measure_used: Measure,
    pub thumbnail: PhaseHistogram,
}

/// Parameters for [`suggest`].
#[derive(Debug, Clone)]
pub struct SuggestOptions {
    pub measure: Measure,
    pub max_count: usize,
    pub bin_count: usize,
    pub aggregation: BinAggregation,
    /// Candidates below this period length are dropped.
    pub lower_bound: f64,
    pub factors: FactorSet,
}

impl Default for SuggestOptions {
    fn default() -> Self {
        Self {
            measure: Measure::default(),
            max_count: DEFAULT_SUGGESTION_COUNT,
            bin_count: DEFAULT_BIN_COUNT,
            aggregation: BinAggregation::Count,
            lower_bound: DEFAULT_LOWER_BOUND,
            factors: FactorSet::default(),
        }
    }
}

/// Distance of a factor from 1 on a log scale.
fn distance_from_one(f: Rational) -> f64 {
    f.value().ln().abs()
}

/// Orders candidates by descending score, then factor nearer 1, then smaller tau.
pub fn rank_order(a: &Suggestion, b: &Suggestion) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(distance_from_one(a.factor).total_cmp(&distance_from_one(b.factor)))
        .then(a.tau.seconds().total_cmp(&b.tau.seconds()))
}

/// Evaluates every in-range candidate `current_tau · f` and returns the best
/// `max_count` by the selected measure.
pub fn suggest(
    series: &EventSeries,
    current_tau: PeriodLength,
    options: &SuggestOptions,
) -> Result<Vec<Suggestion>> {
    series.check_period(current_tau)?;
    options.aggregation.check(series)?;
    crate::histogram::check_bin_count(options.bin_count)?;
    if options.max_count == 0 {
        return Ok(Vec::new());
    }
    let lower = options.lower_bound;
    let upper = series.extent();
    let mut out = options
        .factors
        .factors()
        .par_iter()
        .filter_map(|&factor| {
            let tau = current_tau.seconds() * factor.value();
            if tau < lower || tau > upper {
                return None;
            }
            Some((factor, PeriodLength::new(tau)))
        })
        .map(|(factor, tau)| {
            let tau = tau?;
            let (thumbnail, measures) =
                analyze_period(series, tau, options.bin_count, &options.aggregation)?;
            Ok(Suggestion {
                tau,
                factor,
                score: options.measure.score(&measures),
                measure_used: options.measure,
                thumbnail,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by(rank_order);
    out.truncate(options.max_count);
    Ok(out)
}
