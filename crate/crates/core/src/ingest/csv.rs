use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, WriterBuilder};

use super::timestamp::parse_timestamp;
use super::{IngestError, RawTimeSeries};
use crate::series::EventSeries;

/// Column layout of a CSV input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub timestamp_column: String,
    /// Numeric columns attached as attributes (or raw value columns).
    pub attribute_columns: Vec<String>,
    /// String columns attached as labels.
    pub label_columns: Vec<String>,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            timestamp_column: "timestamp".to_string(),
            attribute_columns: Vec::new(),
            label_columns: Vec::new(),
            delimiter: b',',
        }
    }
}

impl CsvOptions {
    pub fn with_attributes<I, S>(mut self, columns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.attribute_columns = columns.into_iter().map(Into::into).collect();
        self
    }
}

/// Options for `text` with every non-timestamp column attached: columns whose
/// first data value parses as a number become attributes, the rest labels.
pub fn infer_options(
    text: &str,
    timestamp_column: &str,
    delimiter: u8,
) -> Result<CsvOptions, IngestError> {
    let mut reader = ReaderBuilder::new()
        .delimiter(delimiter)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    column_index(&headers, timestamp_column)?;
    let first = reader.records().next().transpose()?;
    let mut options = CsvOptions {
        timestamp_column: timestamp_column.to_string(),
        delimiter,
        ..CsvOptions::default()
    };
    for (i, name) in headers.iter().enumerate() {
        if name == timestamp_column {
            continue;
        }
        let numeric = first
            .as_ref()
            .and_then(|r| r.get(i))
            .is_some_and(|v| v.parse::<f64>().is_ok());
        if numeric {
            options.attribute_columns.push(name.to_string());
        } else {
            options.label_columns.push(name.to_string());
        }
    }
    Ok(options)
}

struct Table {
    timestamps: Vec<f64>,
    numeric: BTreeMap<String, Vec<f64>>,
    labels: BTreeMap<String, Vec<String>>,
    extent: Option<(f64, f64)>,
}

/// An optional first line `# t_start=<s>,t_end=<s>` pins the extent.
fn extent_header(text: &str) -> Result<Option<(f64, f64)>, IngestError> {
    let Some(first) = text.lines().next() else {
        return Ok(None);
    };
    let Some(meta) = first.trim().strip_prefix('#') else {
        return Ok(None);
    };
    let mut start = None;
    let mut end = None;
    for part in meta.split(',') {
        match part.trim().split_once('=') {
            Some(("t_start", v)) => start = v.trim().parse::<f64>().ok(),
            Some(("t_end", v)) => end = v.trim().parse::<f64>().ok(),
            _ => {}
        }
    }
    match (start, end) {
        (Some(s), Some(e)) => Ok(Some((s, e))),
        (None, None) => Ok(None),
        _ => Err(IngestError::Row {
            line: 1,
            message: format!("malformed extent header `{first}`"),
        }),
    }
}

fn column_index(headers: &StringRecord, name: &str) -> Result<usize, IngestError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| {
            let known: Vec<&str> = headers.iter().collect();
            IngestError::Schema(format!(
                "missing column `{name}` (found: {})",
                known.join(", ")
            ))
        })
}

fn read_table(text: &str, options: &CsvOptions) -> Result<Table, IngestError> {
    let extent = extent_header(text)?;
    let mut reader = ReaderBuilder::new()
        .delimiter(options.delimiter)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.is_empty() {
        return Err(IngestError::Empty("file has no header row".into()));
    }
    let ts_idx = column_index(&headers, &options.timestamp_column)?;
    let num_idx = options
        .attribute_columns
        .iter()
        .map(|c| column_index(&headers, c).map(|i| (c.clone(), i)))
        .collect::<Result<Vec<_>, _>>()?;
    let label_idx = options
        .label_columns
        .iter()
        .map(|c| column_index(&headers, c).map(|i| (c.clone(), i)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut timestamps = Vec::new();
    let mut numeric: BTreeMap<String, Vec<f64>> = num_idx
        .iter()
        .map(|(c, _)| (c.clone(), Vec::new()))
        .collect();
    let mut labels: BTreeMap<String, Vec<String>> = label_idx
        .iter()
        .map(|(c, _)| (c.clone(), Vec::new()))
        .collect();

    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let raw = field(ts_idx);
        let t = parse_timestamp(raw).ok_or_else(|| IngestError::Row {
            line,
            message: format!("unparseable timestamp `{raw}`"),
        })?;
        timestamps.push(t);
        for (name, i) in &num_idx {
            let raw = field(*i);
            let v = raw.parse::<f64>().map_err(|_| IngestError::Row {
                line,
                message: format!("column `{name}`: `{raw}` is not a number"),
            })?;
            numeric.get_mut(name).expect("column registered").push(v);
        }
        for (name, i) in &label_idx {
            labels
                .get_mut(name)
                .expect("column registered")
                .push(field(*i).to_string());
        }
    }
    if timestamps.is_empty() {
        return Err(IngestError::Empty("file has no data rows".into()));
    }
    Ok(Table {
        timestamps,
        numeric,
        labels,
        extent,
    })
}

/// Parses CSV text into an event series, sorting rows by timestamp.
///
/// The extent is the min/max timestamp unless an extent header line is present.
pub fn read_events_csv(text: &str, options: &CsvOptions) -> Result<EventSeries, IngestError> {
    let table = read_table(text, options)?;
    Ok(EventSeries::from_unsorted(
        table.timestamps,
        table.extent,
        table.numeric,
        table.labels,
    )?)
}

pub fn load_events_csv(path: &Path, options: &CsvOptions) -> Result<EventSeries, IngestError> {
    let text = fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    read_events_csv(&text, options)
}

/// Parses CSV text into a raw series; `attribute_columns` are the value columns.
///
/// With no value columns named, every column other than the timestamp and the
/// label columns is read as one.
pub fn read_raw_csv(
    text: &str,
    name: &str,
    source: &str,
    options: &CsvOptions,
) -> Result<RawTimeSeries, IngestError> {
    let mut options = options.clone();
    if options.attribute_columns.is_empty() {
        let mut reader = ReaderBuilder::new()
            .delimiter(options.delimiter)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        options.attribute_columns = reader
            .headers()?
            .iter()
            .filter(|h| {
                *h != options.timestamp_column && !options.label_columns.iter().any(|l| l == h)
            })
            .map(str::to_string)
            .collect();
    }
    let table = read_table(text, &options)?;
    RawTimeSeries::new(name, source, table.timestamps, table.numeric)
}

pub fn load_raw_csv(path: &Path, options: &CsvOptions) -> Result<RawTimeSeries, IngestError> {
    let text = fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_raw_csv(&text, &name, &path.display().to_string(), options)
}

/// Writes an event series as CSV that [`read_events_csv`] reproduces exactly:
/// an extent header line, then `timestamp`, attribute and label columns.
pub fn write_events_csv<W: Write>(series: &EventSeries, out: W) -> Result<(), IngestError> {
    let mut out = out;
    writeln!(
        out,
        "# t_start={},t_end={}",
        series.t_start(),
        series.t_end()
    )
    .map_err(|e| IngestError::io(Path::new("<output>"), e))?;
    let mut writer = WriterBuilder::new().from_writer(out);
    let mut header = vec!["timestamp".to_string()];
    header.extend(series.attributes().keys().cloned());
    header.extend(series.labels().keys().cloned());
    writer.write_record(&header)?;
    for (j, t) in series.events().iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(series.attributes().values().map(|col| col[j].to_string()));
        row.extend(series.labels().values().map(|col| col[j].clone()));
        writer.write_record(&row)?;
    }
    writer
        .flush()
        .map_err(|e| IngestError::io(Path::new("<output>"), e))?;
    Ok(())
}
