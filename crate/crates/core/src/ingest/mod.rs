//! Loading event series and raw time series from files, thresholding raw
//! series into events, and the dataset catalog.

mod catalog;
mod csv;
mod json;
mod threshold;
mod timestamp;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::catalog::{Catalog, DatasetData, DatasetKind, DatasetRecord};
pub use self::csv::{
    infer_options, load_events_csv, load_raw_csv, read_events_csv, read_raw_csv, write_events_csv,
    CsvOptions,
};
pub use self::json::{load_events_json, read_events_json};
pub use self::threshold::{threshold_events, Predicate};
pub use self::timestamp::{format_timestamp, parse_timestamp};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] ::csv::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("empty dataset: {0}")]
    Empty(String),
    #[error("unknown dataset `{0}`")]
    NotFound(String),
    #[error("dataset `{0}` is a raw series, not an event series")]
    NotEvents(String),
    #[error(transparent)]
    Series(#[from] crate::Error),
}

impl IngestError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        IngestError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// A sampled time series with named value columns aligned to its timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTimeSeries {
    pub name: String,
    pub source: String,
    timestamps: Vec<f64>,
    values: BTreeMap<String, Vec<f64>>,
}

impl RawTimeSeries {
    /// Sorts samples by timestamp and checks column lengths.
    pub fn new(
        name: impl Into<String>,
        source: impl Into<String>,
        timestamps: Vec<f64>,
        values: BTreeMap<String, Vec<f64>>,
    ) -> Result<Self, IngestError> {
        let n = timestamps.len();
        if n == 0 {
            return Err(IngestError::Empty("time series has no samples".into()));
        }
        for (col, v) in &values {
            if v.len() != n {
                return Err(IngestError::Schema(format!(
                    "column `{col}` has {} values for {n} timestamps",
                    v.len()
                )));
            }
        }
        if timestamps.iter().any(|t| !t.is_finite()) {
            return Err(IngestError::Schema("timestamps must be finite".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| timestamps[a].total_cmp(&timestamps[b]));
        let timestamps = order.iter().map(|&i| timestamps[i]).collect();
        let values = values
            .into_iter()
            .map(|(k, v)| (k, order.iter().map(|&i| v[i]).collect()))
            .collect();
        Ok(Self {
            name: name.into(),
            source: source.into(),
            timestamps,
            values,
        })
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.values.get(name).map(Vec::as_slice)
    }

    pub fn columns(&self) -> &BTreeMap<String, Vec<f64>> {
        &self.values
    }

    pub fn t_start(&self) -> f64 {
        self.timestamps[0]
    }

    pub fn t_end(&self) -> f64 {
        self.timestamps[self.timestamps.len() - 1]
    }
}
