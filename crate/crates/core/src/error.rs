use thiserror::Error;

/// Errors raised by the periodicity math, the period grid and guidance.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid period length {0}: must be positive and finite")]
    InvalidPeriod(f64),

    #[error("period length {tau} s outside the valid range [{lower}, {upper}] s")]
    PeriodOutOfRange { tau: f64, lower: f64, upper: f64 },

    #[error("bin count must be at least 2, got {0}")]
    InvalidBinCount(usize),

    #[error("unknown attribute `{0}`")]
    MissingAttribute(String),

    #[error("invalid event series: {0}")]
    InvalidSeries(String),

    #[error(
        "detail view needs {rows} rows but the cap is {cap}; pick a larger period length or a coarser view"
    )]
    TooManyRows { rows: usize, cap: usize },

    #[error("empty ladder: extent {extent} s does not exceed lower bound {lower_bound} s")]
    EmptyLadder { extent: f64, lower_bound: f64 },

    #[error("invalid ladder growth ratio {0}: must be finite and greater than 1")]
    InvalidGrowth(f64),

    #[error("invalid aggregation `{0}`; expected count, mean:<attribute> or variance:<attribute>")]
    InvalidAggregation(String),

    #[error("unknown measure `{0}`; expected entropy or vector-strength")]
    UnknownMeasure(String),

    #[error("invalid phase offset {0}: must be finite")]
    InvalidOffset(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid duration `{0}`; expected a number with optional unit s, min, h, d or y")]
    InvalidDuration(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
