use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{IngestError, RawTimeSeries};
use crate::series::EventSeries;

/// Which samples of a raw series become events.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "op", content = "threshold")]
pub enum Predicate {
    GreaterThan(f64),
    LessThan(f64),
}

impl Predicate {
    pub fn matches(self, value: f64) -> bool {
        match self {
            Predicate::GreaterThan(t) => value > t,
            Predicate::LessThan(t) => value < t,
        }
    }
}

/// One event per sample of `column` satisfying `predicate`.
///
/// Every value column is carried along for the surviving samples. The extent
/// stays that of the raw series so phases remain anchored at its start.
pub fn threshold_events(
    raw: &RawTimeSeries,
    column: &str,
    predicate: Predicate,
) -> Result<EventSeries, IngestError> {
    let values = raw
        .column(column)
        .ok_or_else(|| IngestError::Schema(format!("missing column `{column}`")))?;
    let keep: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| predicate.matches(v))
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Err(IngestError::Empty(format!(
            "no events: no sample of `{column}` satisfies {predicate:?}"
        )));
    }
    let events = keep.iter().map(|&i| raw.timestamps()[i]).collect();
    let attributes: BTreeMap<String, Vec<f64>> = raw
        .columns()
        .iter()
        .map(|(name, col)| (name.clone(), keep.iter().map(|&i| col[i]).collect()))
        .collect();
    Ok(EventSeries::from_unsorted(
        events,
        Some((raw.t_start(), raw.t_end())),
        attributes,
        BTreeMap::new(),
    )?)
}
