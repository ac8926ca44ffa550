//! Catalog, per-dataset grids and background precomputation.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use axum::http::HeaderValue;
use phasefold_core::grid::{
    build_ladder_with_growth, precompute_grid_with_progress, read_grid_cache, write_grid_cache,
    GridCacheKey, SampleLadder, DEFAULT_GROWTH, DEFAULT_LOWER_BOUND,
};
use phasefold_core::ingest::{Catalog, DatasetData, DatasetKind, DatasetRecord, IngestError};
use phasefold_core::{BinAggregation, EventSeries, PeriodGrid, DEFAULT_BIN_COUNT};
use tokio::sync::OnceCell;

use crate::error::ApiError;

/// Server-wide analysis defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    /// Bin count of the grid built at upload.
    pub bin_count: usize,
    pub lower_bound: f64,
    pub growth: f64,
    /// Origin allowed by CORS; `None` allows any origin.
    pub allowed_origin: Option<HeaderValue>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bin_count: DEFAULT_BIN_COUNT,
            lower_bound: DEFAULT_LOWER_BOUND,
            growth: DEFAULT_GROWTH,
            allowed_origin: None,
        }
    }
}

pub(crate) type GridKey = (usize, BinAggregation);
pub(crate) type SharedGrid = Arc<RwLock<PeriodGrid>>;

pub(crate) struct Dataset {
    pub id: String,
    pub series: Arc<EventSeries>,
    pub ladder: Arc<SampleLadder>,
    pub progress: AtomicUsize,
    ready: AtomicBool,
    failure: OnceLock<String>,
    grids: Mutex<HashMap<GridKey, Arc<OnceCell<SharedGrid>>>>,
}

impl Dataset {
    fn new(id: String, series: EventSeries, config: &ServiceConfig) -> Result<Self, ApiError> {
        let ladder = build_ladder_with_growth(series.extent(), config.lower_bound, config.growth)
            .map_err(|e| ApiError::unprocessable(e.to_string()))?;
        Ok(Self {
            id,
            series: Arc::new(series),
            ladder: Arc::new(ladder),
            progress: AtomicUsize::new(0),
            ready: AtomicBool::new(false),
            failure: OnceLock::new(),
            grids: Mutex::new(HashMap::new()),
        })
    }

    pub fn is_ready(&self) -> bool {
        self.ready.load(Ordering::Acquire)
    }

    pub fn failure(&self) -> Option<&str> {
        self.failure.get().map(String::as_str)
    }

    fn cell(&self, key: &GridKey) -> Arc<OnceCell<SharedGrid>> {
        self.grids
            .lock()
            .expect("grid map poisoned")
            .entry(key.clone())
            .or_default()
            .clone()
    }

    /// Errors with 409 until the upload grid exists.
    pub fn require_ready(&self) -> Result<(), ApiError> {
        if let Some(msg) = self.failure() {
            return Err(ApiError::internal(format!("precomputation failed: {msg}")));
        }
        if !self.is_ready() {
            return Err(ApiError::not_ready(&self.id));
        }
        Ok(())
    }
}

struct Inner {
    config: ServiceConfig,
    data_dir: Option<PathBuf>,
    catalog: RwLock<Catalog>,
    datasets: RwLock<BTreeMap<String, Arc<Dataset>>>,
}

/// Shared handle passed to every request handler.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    /// A state whose datasets live only in memory.
    pub fn in_memory(config: ServiceConfig) -> Self {
        Self::with_catalog(config, None, Catalog::in_memory())
    }

    /// Opens (or creates) a persistent catalog under `dir` and resumes
    /// precomputation for every event dataset in it, reusing cached grids.
    pub fn open(config: ServiceConfig, dir: &Path) -> Result<Self, IngestError> {
        let catalog = Catalog::open(dir)?;
        let state = Self::with_catalog(config, Some(dir.to_path_buf()), catalog);
        let records = state.catalog().list();
        for record in records
            .into_iter()
            .filter(|r| r.kind == DatasetKind::Events)
        {
            let data = state.catalog().data(&record.id)?;
            if let DatasetData::Events(series) = &*data {
                // a dataset whose ladder cannot be built stays listed but unusable
                if let Ok(ds) = Dataset::new(record.id.clone(), series.clone(), &state.inner.config)
                {
                    state.start(Arc::new(ds));
                }
            }
        }
        Ok(state)
    }

    fn with_catalog(config: ServiceConfig, data_dir: Option<PathBuf>, catalog: Catalog) -> Self {
        Self {
            inner: Arc::new(Inner {
                config,
                data_dir,
                catalog: RwLock::new(catalog),
                datasets: RwLock::new(BTreeMap::new()),
            }),
        }
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.inner.config
    }

    fn catalog(&self) -> std::sync::RwLockReadGuard<'_, Catalog> {
        self.inner.catalog.read().expect("catalog poisoned")
    }

    pub(crate) fn records(&self) -> Vec<DatasetRecord> {
        self.catalog().list()
    }

    pub(crate) fn record(&self, id: &str) -> Result<DatasetRecord, ApiError> {
        Ok(self.catalog().record(id)?.clone())
    }

    pub(crate) fn dataset_opt(&self, id: &str) -> Option<Arc<Dataset>> {
        self.inner
            .datasets
            .read()
            .expect("dataset map poisoned")
            .get(id)
            .cloned()
    }

    /// The event dataset `id`; 404 when unknown, 422 for a raw series.
    pub(crate) fn dataset(&self, id: &str) -> Result<Arc<Dataset>, ApiError> {
        if let Some(ds) = self.dataset_opt(id) {
            return Ok(ds);
        }
        let record = self.record(id)?;
        match record.kind {
            DatasetKind::RawSeries => Err(IngestError::NotEvents(id.to_string()).into()),
            DatasetKind::Events => Err(ApiError::unprocessable(format!(
                "dataset `{id}` cannot be analyzed: its extent does not exceed the ladder lower bound"
            ))),
        }
    }

    /// Registers an event series and starts building its grid in the background.
    pub(crate) fn add_events(
        &self,
        name: String,
        origin: Option<String>,
        series: EventSeries,
    ) -> Result<(DatasetRecord, Arc<Dataset>), ApiError> {
        // validate the ladder before anything is stored
        build_ladder_with_growth(
            series.extent(),
            self.inner.config.lower_bound,
            self.inner.config.growth,
        )
        .map_err(|e| ApiError::unprocessable(e.to_string()))?;
        let id = self
            .inner
            .catalog
            .write()
            .expect("catalog poisoned")
            .register(name, origin, DatasetData::Events(series.clone()))?;
        let ds = Arc::new(Dataset::new(id.clone(), series, &self.inner.config)?);
        self.start(ds.clone());
        Ok((self.record(&id)?, ds))
    }

    fn default_key(&self) -> GridKey {
        (self.inner.config.bin_count, BinAggregation::Count)
    }

    fn start(&self, ds: Arc<Dataset>) {
        self.inner
            .datasets
            .write()
            .expect("dataset map poisoned")
            .insert(ds.id.clone(), ds.clone());
        let key = self.default_key();
        let cache_dir = self.inner.data_dir.clone();
        std::thread::spawn(move || {
            match load_or_build(&ds, &key, cache_dir.as_deref(), &ds.progress) {
                Ok(grid) => {
                    let _ = ds.cell(&key).set(Arc::new(RwLock::new(grid)));
                    ds.ready.store(true, Ordering::Release);
                }
                Err(e) => {
                    let _ = ds.failure.set(e.message);
                }
            }
        });
    }

    /// The grid for `(bins, aggregation)`, built on first use once the
    /// dataset is ready.
    pub(crate) async fn grid(
        &self,
        ds: &Arc<Dataset>,
        key: GridKey,
    ) -> Result<SharedGrid, ApiError> {
        ds.require_ready()?;
        let cell = ds.cell(&key);
        let cache_dir = self.inner.data_dir.clone();
        let ds = ds.clone();
        cell.get_or_try_init(|| async move {
            let grid = tokio::task::spawn_blocking(move || {
                load_or_build(&ds, &key, cache_dir.as_deref(), &AtomicUsize::new(0))
            })
            .await
            .map_err(|e| ApiError::internal(e.to_string()))??;
            Ok::<_, ApiError>(Arc::new(RwLock::new(grid)))
        })
        .await
        .cloned()
    }
}

fn cache_path(dir: &Path, key: &GridCacheKey) -> PathBuf {
    dir.join("grids").join(key.file_name())
}

/// Reads a matching cached grid or precomputes (and caches) a fresh one.
fn load_or_build(
    ds: &Dataset,
    key: &GridKey,
    cache_dir: Option<&Path>,
    progress: &AtomicUsize,
) -> Result<PeriodGrid, ApiError> {
    let cache_key = GridCacheKey {
        dataset_id: ds.id.clone(),
        bin_count: key.0,
        aggregation: key.1.clone(),
    };
    if let Some(dir) = cache_dir {
        let path = cache_path(dir, &cache_key);
        if let Ok((stored, grid)) = read_grid_cache(&path) {
            let same_ladder = grid.len() == ds.ladder.len()
                && grid.lower_bound() == ds.ladder.lower_bound()
                && grid.upper_bound() == ds.ladder.upper_bound()
                && grid
                    .rows()
                    .iter()
                    .zip(ds.ladder.samples())
                    .all(|(r, &s)| r.tau.seconds() == s);
            if stored == cache_key && same_ladder {
                progress.store(ds.ladder.len(), Ordering::Relaxed);
                return Ok(grid);
            }
        }
    }
    let grid = precompute_grid_with_progress(&ds.series, &ds.ladder, key.0, &key.1, progress)?;
    if let Some(dir) = cache_dir {
        let path = cache_path(dir, &cache_key);
        std::fs::create_dir_all(path.parent().expect("cache path has a parent"))
            .map_err(|e| ApiError::internal(format!("{}: {e}", path.display())))?;
        write_grid_cache(&path, &cache_key, &grid)?;
    }
    Ok(grid)
}
