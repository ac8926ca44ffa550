//! Request handlers and the JSON bodies they return.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::Json;
use phasefold_core::detail::DEFAULT_MAX_ROWS;
use phasefold_core::grid::{Window, DEFAULT_CONTEXT_ROWS};
use phasefold_core::ingest::{
    infer_options, read_events_csv, read_events_json, read_raw_csv, threshold_events, CsvOptions,
    DatasetKind, DatasetRecord, Predicate,
};
use phasefold_core::units::parse_duration;
use phasefold_core::{
    assign_phases, detail_matrix, suggest, BinAggregation, EventSeries, MappingKind, Measure,
    PeriodLength, PhaseMapping, Provenance, QualityMeasures, SuggestOptions,
};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::state::{AppState, Dataset};

/// Largest bin count accepted on any endpoint.
pub const MAX_BIN_COUNT: usize = 360;
/// Ticks returned when `count` is omitted.
pub const DEFAULT_TICK_COUNT: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Progress {
    pub done: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStatus {
    pub id: String,
    pub name: String,
    pub kind: DatasetKind,
    pub origin: Option<String>,
    pub loaded_at: String,
    pub sample_count: usize,
    pub ready: bool,
    pub progress: Progress,
    pub error: Option<String>,
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub attributes: Vec<String>,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowView {
    pub tau: f64,
    pub bins: Vec<Option<f64>>,
    pub counts: Vec<u64>,
    pub measures: QualityMeasures,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridWindowResponse {
    pub dataset_id: String,
    pub rows: Vec<RowView>,
    pub center_index: usize,
    pub bin_count: usize,
    pub aggregation: BinAggregation,
    /// Smallest and largest bin value over the returned rows, for color scaling.
    pub color_min: Option<f64>,
    pub color_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thumbnail {
    pub bins: Vec<Option<f64>>,
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionView {
    pub tau: f64,
    /// `"k/n"` or `"m"`.
    pub factor: String,
    pub score: f64,
    pub thumbnail: Thumbnail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestionResponse {
    pub dataset_id: String,
    pub current_tau: f64,
    pub measure_used: Measure,
    pub suggestions: Vec<SuggestionView>,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailResponse {
    pub dataset_id: String,
    pub tau: f64,
    pub bin_count: usize,
    pub aggregation: BinAggregation,
    pub row_count: usize,
    pub rows: Vec<Vec<Option<f64>>>,
    pub counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldValues {
    Numbers(Vec<f64>),
    Labels(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasesResponse {
    pub dataset_id: String,
    pub tau: f64,
    pub offset: f64,
    pub events: Vec<f64>,
    /// Per-event mapping parameter in `[0, 1)`.
    pub u: Vec<f64>,
    pub fields: BTreeMap<String, FieldValues>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickView {
    pub tau: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TicksResponse {
    pub dataset_id: String,
    pub measure: Measure,
    pub bin_count: usize,
    pub aggregation: BinAggregation,
    pub ticks: Vec<TickView>,
}

// -- query parsing -----------------------------------------------------------

fn parse_tau(text: Option<&str>) -> Result<PeriodLength, ApiError> {
    let text = text.ok_or_else(|| ApiError::bad_request("missing query parameter `tau`"))?;
    Ok(PeriodLength::new(parse_duration(text)?)?)
}

fn parse_or<T: FromStr>(text: Option<&str>, default: T, name: &str) -> Result<T, ApiError> {
    match text {
        None => Ok(default),
        Some(t) => t
            .trim()
            .parse()
            .map_err(|_| ApiError::bad_request(format!("invalid `{name}`: `{t}`"))),
    }
}

fn parse_measure(text: Option<&str>, default: Measure) -> Result<Measure, ApiError> {
    text.map_or(Ok(default), |t| Ok(t.parse::<Measure>()?))
}

fn parse_view(
    state: &AppState,
    series: &EventSeries,
    bins: Option<&str>,
    aggregation: Option<&str>,
) -> Result<(usize, BinAggregation), ApiError> {
    let bins = parse_or(bins, state.config().bin_count, "bins")?;
    if !(2..=MAX_BIN_COUNT).contains(&bins) {
        return Err(ApiError::bad_request(format!(
            "bins must be between 2 and {MAX_BIN_COUNT}, got {bins}"
        )));
    }
    let aggregation = match aggregation {
        None => BinAggregation::Count,
        Some(a) => a.parse::<BinAggregation>()?,
    };
    aggregation.check(series)?;
    Ok((bins, aggregation))
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

// -- datasets ----------------------------------------------------------------

fn status(record: DatasetRecord, ds: Option<&Dataset>) -> DatasetStatus {
    let (series, ladder) = match ds {
        Some(d) => (Some(&*d.series), Some(&*d.ladder)),
        None => (None, None),
    };
    let ready = ds.is_some_and(Dataset::is_ready);
    let total = ladder.map_or(0, |l| l.len());
    DatasetStatus {
        id: record.id,
        name: record.name,
        kind: record.kind,
        origin: record.origin,
        loaded_at: record.loaded_at,
        sample_count: record.sample_count,
        ready,
        progress: Progress {
            done: ds.map_or(0, |d| {
                d.progress
                    .load(std::sync::atomic::Ordering::Relaxed)
                    .min(total)
            }),
            total,
        },
        error: ds.and_then(|d| d.failure().map(str::to_string)),
        t_start: series.map(EventSeries::t_start),
        t_end: series.map(EventSeries::t_end),
        lower_bound: ladder.map(|l| l.lower_bound()),
        upper_bound: ladder.map(|l| l.upper_bound()),
        attributes: series.map_or_else(Vec::new, |s| s.attributes().keys().cloned().collect()),
        labels: series.map_or_else(Vec::new, |s| s.labels().keys().cloned().collect()),
    }
}

pub(crate) async fn list_datasets(State(state): State<AppState>) -> Json<Vec<DatasetStatus>> {
    let out = state
        .records()
        .into_iter()
        .map(|r| {
            let ds = state.dataset_opt(&r.id);
            status(r, ds.as_deref())
        })
        .collect();
    Json(out)
}

pub(crate) async fn get_dataset(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<DatasetStatus>, ApiError> {
    let record = state.record(&id)?;
    let ds = state.dataset_opt(&id);
    Ok(Json(status(record, ds.as_deref())))
}

/// Schema hints for an upload.
#[derive(Debug, Default, Deserialize)]
pub(crate) struct UploadQuery {
    name: Option<String>,
    /// `csv` or `json`; guessed from the content type and body when absent.
    format: Option<String>,
    /// Timestamp column (CSV) or field (JSON).
    timestamp: Option<String>,
    /// Comma-separated numeric columns; all columns are inferred when neither
    /// this nor `labels` is given.
    attributes: Option<String>,
    labels: Option<String>,
    delimiter: Option<String>,
    /// Derive events from a raw CSV series by thresholding this column.
    column: Option<String>,
    gt: Option<f64>,
    lt: Option<f64>,
}

fn split_list(text: &Option<String>) -> Vec<String> {
    text.as_deref()
        .map(|t| {
            t.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect()
        })
        .unwrap_or_default()
}

fn parse_delimiter(text: Option<&str>) -> Result<u8, ApiError> {
    match text {
        None => Ok(b','),
        Some("tab" | "\\t" | "\t") => Ok(b'\t'),
        Some(t) if t.len() == 1 => Ok(t.as_bytes()[0]),
        Some(t) => Err(ApiError::bad_request(format!("invalid delimiter `{t}`"))),
    }
}

fn parse_upload(
    q: &UploadQuery,
    is_json: bool,
    body: &str,
) -> Result<(EventSeries, Option<String>), ApiError> {
    let ts = q
        .timestamp
        .clone()
        .unwrap_or_else(|| "timestamp".to_string());
    if is_json {
        if q.column.is_some() {
            return Err(ApiError::unprocessable(
                "event derivation needs a CSV upload",
            ));
        }
        return Ok((read_events_json(body, &ts)?, None));
    }
    let delimiter = parse_delimiter(q.delimiter.as_deref())?;
    let options = if q.attributes.is_none() && q.labels.is_none() {
        infer_options(body, &ts, delimiter)?
    } else {
        CsvOptions {
            timestamp_column: ts,
            attribute_columns: split_list(&q.attributes),
            label_columns: split_list(&q.labels),
            delimiter,
        }
    };
    let Some(column) = &q.column else {
        return Ok((read_events_csv(body, &options)?, None));
    };
    let (predicate, origin) = match (q.gt, q.lt) {
        (Some(v), None) => (Predicate::GreaterThan(v), format!("{column} > {v}")),
        (None, Some(v)) => (Predicate::LessThan(v), format!("{column} < {v}")),
        _ => {
            return Err(ApiError::bad_request(
                "event derivation needs exactly one of `gt` or `lt`",
            ))
        }
    };
    let raw_options = CsvOptions {
        label_columns: Vec::new(),
        ..options
    };
    let raw = read_raw_csv(body, "upload", "upload", &raw_options)?;
    Ok((threshold_events(&raw, column, predicate)?, Some(origin)))
}

pub(crate) async fn upload(
    State(state): State<AppState>,
    headers: HeaderMap,
    Query(q): Query<UploadQuery>,
    body: String,
) -> Result<(StatusCode, Json<DatasetStatus>), ApiError> {
    let is_json = match q.format.as_deref() {
        Some("json" | "ndjson") => true,
        Some("csv") => false,
        Some(other) => return Err(ApiError::bad_request(format!("unknown format `{other}`"))),
        None => {
            let ct = headers
                .get(header::CONTENT_TYPE)
                .and_then(|v| v.to_str().ok())
                .unwrap_or("");
            ct.contains("json") || body.trim_start().starts_with(['[', '{'])
        }
    };
    let name = q.name.clone().unwrap_or_else(|| "upload".to_string());
    let (series, origin) = blocking(move || parse_upload(&q, is_json, &body)).await?;
    let (record, ds) = state.add_events(name, origin, series)?;
    Ok((StatusCode::CREATED, Json(status(record, Some(&ds)))))
}

// -- analysis ----------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
pub(crate) struct WindowQuery {
    tau: Option<String>,
    rows: Option<String>,
    bins: Option<String>,
    aggregation: Option<String>,
}

fn color_range(rows: &[RowView]) -> (Option<f64>, Option<f64>) {
    let values = rows.iter().flat_map(|r| r.bins.iter().flatten().copied());
    values.fold((None, None), |(lo, hi), v| {
        (
            Some(lo.map_or(v, |l: f64| l.min(v))),
            Some(hi.map_or(v, |h: f64| h.max(v))),
        )
    })
}

pub(crate) async fn window(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<WindowQuery>,
) -> Result<Json<GridWindowResponse>, ApiError> {
    let ds = state.dataset(&id)?;
    ds.require_ready()?;
    let tau = parse_tau(q.tau.as_deref())?;
    let context = parse_or(q.rows.as_deref(), DEFAULT_CONTEXT_ROWS, "rows")?;
    if context == 0 {
        return Err(ApiError::bad_request("rows must be at least 1"));
    }
    let (bins, aggregation) = parse_view(
        &state,
        &ds.series,
        q.bins.as_deref(),
        q.aggregation.as_deref(),
    )?;
    let grid = state.grid(&ds, (bins, aggregation.clone())).await?;
    let series = Arc::clone(&ds.series);
    let window: Window = blocking(move || {
        {
            let g = grid.read().expect("grid poisoned");
            g.check_range(tau)?;
            if let Some(i) = g.position(tau) {
                return Ok(g.window_at(i, context));
            }
        }
        let mut g = grid.write().expect("grid poisoned");
        Ok(g.neighborhood(&series, tau, context)?)
    })
    .await?;
    let rows: Vec<RowView> = window
        .rows
        .into_iter()
        .map(|r| RowView {
            tau: r.tau.seconds(),
            bins: r.histogram.bins().to_vec(),
            counts: r.histogram.counts().to_vec(),
            measures: r.measures,
            provenance: r.provenance,
        })
        .collect();
    let (color_min, color_max) = color_range(&rows);
    Ok(Json(GridWindowResponse {
        dataset_id: id,
        rows,
        center_index: window.center,
        bin_count: bins,
        aggregation,
        color_min,
        color_max,
    }))
}

#[derive(Debug, Default, Deserialize)]
pub(crate) struct SuggestionQuery {
    tau: Option<String>,
    measure: Option<String>,
    count: Option<String>,
    bins: Option<String>,
    aggregation: Option<String>,
}

pub(crate) async fn suggestions(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<SuggestionQuery>,
) -> Result<Json<SuggestionResponse>, ApiError> {
    let ds = state.dataset(&id)?;
    let tau = parse_tau(q.tau.as_deref())?;
    let measure = parse_measure(q.measure.as_deref(), Measure::default())?;
    let defaults = SuggestOptions::default();
    let max_count = parse_or(q.count.as_deref(), defaults.max_count, "count")?;
    let (bin_count, aggregation) = parse_view(
        &state,
        &ds.series,
        q.bins.as_deref(),
        q.aggregation.as_deref(),
    )?;
    let options = SuggestOptions {
        measure,
        max_count,
        bin_count,
        aggregation,
        lower_bound: state.config().lower_bound,
        ..defaults
    };
    let series = Arc::clone(&ds.series);
    let start = Instant::now();
    let found = blocking(move || Ok(suggest(&series, tau, &options)?)).await?;
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let suggestions = found
        .into_iter()
        .map(|s| SuggestionView {
            tau: s.tau.seconds(),
            factor: s.factor.to_string(),
            score: s.score,
            thumbnail: Thumbnail {
                bins: s.thumbnail.bins().to_vec(),
                counts: s.thumbnail.counts().to_vec(),
            },
        })
        .collect();
    Ok(Json(SuggestionResponse {
        dataset_id: id,
        current_tau: tau.seconds(),
        measure_used: measure,
        suggestions,
        elapsed_ms,
    }))
}

#[derive(Debug, Default, Deserialize)]
pub(crate) struct DetailQuery {
    tau: Option<String>,
    bins: Option<String>,
    aggregation: Option<String>,
    /// Lowers the row cap; it cannot be raised above the server cap.
    max_rows: Option<String>,
}

pub(crate) async fn detail(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<DetailQuery>,
) -> Result<Json<DetailResponse>, ApiError> {
    let ds = state.dataset(&id)?;
    let tau = parse_tau(q.tau.as_deref())?;
    let (bins, aggregation) = parse_view(
        &state,
        &ds.series,
        q.bins.as_deref(),
        q.aggregation.as_deref(),
    )?;
    let cap = parse_or(q.max_rows.as_deref(), DEFAULT_MAX_ROWS, "max_rows")?.min(DEFAULT_MAX_ROWS);
    let series = Arc::clone(&ds.series);
    let agg = aggregation.clone();
    let m = blocking(move || Ok(detail_matrix(&series, tau, bins, &agg, cap)?)).await?;
    Ok(Json(DetailResponse {
        dataset_id: id,
        tau: tau.seconds(),
        bin_count: bins,
        aggregation,
        row_count: m.row_count(),
        rows: m.rows,
        counts: m.counts,
    }))
}

#[derive(Debug, Default, Deserialize)]
pub(crate) struct PhasesQuery {
    tau: Option<String>,
    /// Legend offset in radians.
    offset: Option<String>,
    fields: Option<String>,
}

pub(crate) async fn phases(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<PhasesQuery>,
) -> Result<Json<PhasesResponse>, ApiError> {
    let ds = state.dataset(&id)?;
    let tau = parse_tau(q.tau.as_deref())?;
    let offset = parse_or(q.offset.as_deref(), 0.0f64, "offset")?;
    let mapping = PhaseMapping::new(MappingKind::CyclicColor, offset)?;
    let series = &ds.series;
    let mut fields = BTreeMap::new();
    for name in split_list(&q.fields) {
        let values = if let Ok(v) = series.attribute(&name) {
            FieldValues::Numbers(v.to_vec())
        } else if let Some(v) = series.label(&name) {
            FieldValues::Labels(v.to_vec())
        } else {
            return Err(ApiError::bad_request(format!("unknown field `{name}`")));
        };
        fields.insert(name, values);
    }
    let u = assign_phases(series, tau, &mapping)?;
    Ok(Json(PhasesResponse {
        dataset_id: id,
        tau: tau.seconds(),
        offset: mapping.offset(),
        events: series.events().to_vec(),
        u,
        fields,
    }))
}

#[derive(Debug, Default, Deserialize)]
pub(crate) struct TicksQuery {
    measure: Option<String>,
    count: Option<String>,
    bins: Option<String>,
    aggregation: Option<String>,
}

pub(crate) async fn ticks(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<TicksQuery>,
) -> Result<Json<TicksResponse>, ApiError> {
    let ds = state.dataset(&id)?;
    ds.require_ready()?;
    let measure = parse_measure(q.measure.as_deref(), Measure::Entropy)?;
    let count = parse_or(q.count.as_deref(), DEFAULT_TICK_COUNT, "count")?;
    let (bins, aggregation) = parse_view(
        &state,
        &ds.series,
        q.bins.as_deref(),
        q.aggregation.as_deref(),
    )?;
    let grid = state.grid(&ds, (bins, aggregation.clone())).await?;
    let ticks = blocking(move || {
        let g = grid.read().expect("grid poisoned");
        Ok(g.top_ticks(measure, count))
    })
    .await?;
    Ok(Json(TicksResponse {
        dataset_id: id,
        measure,
        bin_count: bins,
        aggregation,
        ticks: ticks
            .into_iter()
            .map(|t| TickView {
                tau: t.tau,
                score: t.score,
            })
            .collect(),
    }))
}
