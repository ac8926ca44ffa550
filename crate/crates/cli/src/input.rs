use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use phasefold_core::ingest::{
    infer_options, read_events_csv, read_events_json, read_raw_csv, RawTimeSeries,
};
use phasefold_core::EventSeries;

fn is_json(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("json" | "ndjson" | "jsonl")
    )
}

/// Loads an event file; CSV columns are inferred, JSON fields flattened.
pub fn load_events(path: &Path, timestamp: &str) -> Result<EventSeries> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let series = if is_json(path) {
        read_events_json(&text, timestamp)
    } else {
        infer_options(&text, timestamp, b',').and_then(|o| read_events_csv(&text, &o))
    };
    series.with_context(|| format!("loading {}", path.display()))
}

pub fn load_raw(path: &Path, timestamp: &str) -> Result<RawTimeSeries> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let options = phasefold_core::ingest::CsvOptions {
        timestamp_column: timestamp.to_string(),
        ..Default::default()
    };
    read_raw_csv(&text, &name, &path.display().to_string(), &options)
        .with_context(|| format!("loading {}", path.display()))
}
