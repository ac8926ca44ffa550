//! Structured-text events: a JSON array of objects, or one object per line.
//!
//! Nested objects are flattened to dotted names (`position.lat`). Numeric
//! fields become attributes and string fields become labels; every field
//! present must appear in every event with the same type.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use super::timestamp::parse_timestamp;
use super::IngestError;
use crate::series::EventSeries;

fn flatten(prefix: &str, obj: &Map<String, Value>, out: &mut BTreeMap<String, Value>) {
    for (k, v) in obj {
        let name = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Object(inner) => flatten(&name, inner, out),
            other => {
                out.insert(name, other.clone());
            }
        }
    }
}

fn parse_records(text: &str) -> Result<Vec<Value>, IngestError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        return match serde_json::from_str(trimmed)? {
            Value::Array(items) => Ok(items),
            _ => unreachable!("input starts with `[`"),
        };
    }
    trimmed
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(IngestError::from))
        .collect()
}

pub fn read_events_json(text: &str, timestamp_field: &str) -> Result<EventSeries, IngestError> {
    let records = parse_records(text)?;
    if records.is_empty() {
        return Err(IngestError::Empty("no events".into()));
    }
    let mut timestamps = Vec::with_capacity(records.len());
    let mut numeric: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut labels: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, record) in records.iter().enumerate() {
        let line = i as u64 + 1;
        let Value::Object(obj) = record else {
            return Err(IngestError::Row {
                line,
                message: "event is not an object".into(),
            });
        };
        let mut flat = BTreeMap::new();
        flatten("", obj, &mut flat);
        let ts = flat.remove(timestamp_field).ok_or_else(|| {
            IngestError::Schema(format!("event {line} has no `{timestamp_field}` field"))
        })?;
        let t = match &ts {
            Value::Number(n) => n.as_f64(),
            Value::String(s) => parse_timestamp(s),
            _ => None,
        }
        .ok_or_else(|| IngestError::Row {
            line,
            message: format!("unparseable timestamp {ts}"),
        })?;
        timestamps.push(t);
        for (name, v) in flat {
            match v {
                Value::Number(n) => numeric
                    .entry(name)
                    .or_default()
                    .push(n.as_f64().unwrap_or(f64::NAN)),
                Value::String(s) => labels.entry(name).or_default().push(s),
                Value::Null => {}
                other => {
                    return Err(IngestError::Row {
                        line,
                        message: format!("field `{name}` has unsupported value {other}"),
                    })
                }
            }
        }
    }
    let n = timestamps.len();
    for (name, col) in numeric
        .iter()
        .map(|(k, v)| (k, v.len()))
        .chain(labels.iter().map(|(k, v)| (k, v.len())))
    {
        if col != n {
            return Err(IngestError::Schema(format!(
                "field `{name}` present in {col} of {n} events"
            )));
        }
    }
    Ok(EventSeries::from_unsorted(
        timestamps, None, numeric, labels,
    )?)
}

pub fn load_events_json(path: &Path, timestamp_field: &str) -> Result<EventSeries, IngestError> {
    let text = fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    read_events_json(&text, timestamp_field)
}
