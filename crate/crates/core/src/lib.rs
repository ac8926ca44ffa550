//! Periodicity exploration for event time series.
//!
//! Events are folded at candidate period lengths into phase histograms, each
//! scored by Shannon entropy and vector strength. A precomputed [`grid`] of
//! period lengths backs interactive browsing, and [`guidance`] proposes
//! rational multiples of the current period that look more periodic.

pub mod detail;
pub mod error;
pub mod grid;
pub mod guidance;
pub mod histogram;
pub mod ingest;
pub mod measures;
pub mod phase;
pub mod series;
pub mod units;

pub use detail::{detail_matrix, DetailMatrix, DEFAULT_MAX_ROWS};
pub use error::{Error, Result};
pub use grid::{
    build_ladder, build_ladder_with_growth, precompute_grid, GridRow, PeriodGrid, Provenance,
    SampleLadder, Tick, Window,
};
pub use guidance::{candidate_factors, suggest, FactorSet, Rational, SuggestOptions, Suggestion};
pub use histogram::{build_phase_histogram, BinAggregation, PhaseHistogram, DEFAULT_BIN_COUNT};
pub use measures::{
    analyze_period, resultant_of_phases, shannon_entropy, vector_strength, Measure, QualityMeasures,
};
pub use phase::{assign_phases, compute_phase, MappingKind, PhaseMapping};
pub use series::{EventSeries, PeriodLength};
