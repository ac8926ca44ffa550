//! Dataset catalog, optionally persisted to a directory:
//! `catalog.json` holds the index and `datasets/<id>.json` each dataset.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use super::{IngestError, RawTimeSeries};
use crate::series::EventSeries;

const INDEX_FILE: &str = "catalog.json";
const INDEX_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    Events,
    RawSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "kebab-case")]
pub enum DatasetData {
    Events(EventSeries),
    RawSeries(RawTimeSeries),
}

impl DatasetData {
    pub fn kind(&self) -> DatasetKind {
        match self {
            DatasetData::Events(_) => DatasetKind::Events,
            DatasetData::RawSeries(_) => DatasetKind::RawSeries,
        }
    }

    fn sample_count(&self) -> usize {
        match self {
            DatasetData::Events(s) => s.len(),
            DatasetData::RawSeries(r) => r.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub name: String,
    pub kind: DatasetKind,
    /// Where the data came from (a path or an upload description).
    pub origin: Option<String>,
    /// RFC 3339 time at which the dataset was registered.
    pub loaded_at: String,
    pub sample_count: usize,
}

#[derive(Serialize, Deserialize)]
struct Index {
    version: u32,
    next_id: u64,
    records: Vec<DatasetRecord>,
}

/// Registered datasets keyed by id. Ids are never reused within a catalog.
#[derive(Debug, Default)]
pub struct Catalog {
    records: BTreeMap<String, (DatasetRecord, Arc<DatasetData>)>,
    next_id: u64,
    dir: Option<PathBuf>,
}

impl Catalog {
    pub fn in_memory() -> Self {
        Self {
            next_id: 1,
            ..Default::default()
        }
    }

    /// Opens (or creates) a catalog persisted under `dir`.
    pub fn open(dir: &Path) -> Result<Self, IngestError> {
        fs::create_dir_all(dir.join("datasets")).map_err(|e| IngestError::io(dir, e))?;
        let mut catalog = Self {
            records: BTreeMap::new(),
            next_id: 1,
            dir: Some(dir.to_path_buf()),
        };
        let index_path = dir.join(INDEX_FILE);
        if !index_path.exists() {
            return Ok(catalog);
        }
        let file = File::open(&index_path).map_err(|e| IngestError::io(&index_path, e))?;
        let index: Index = serde_json::from_reader(BufReader::new(file))?;
        if index.version != INDEX_VERSION {
            return Err(IngestError::Schema(format!(
                "catalog index version {} (expected {INDEX_VERSION})",
                index.version
            )));
        }
        catalog.next_id = index.next_id;
        for record in index.records {
            let path = catalog.data_path(&record.id).expect("persistent catalog");
            let file = File::open(&path).map_err(|e| IngestError::io(&path, e))?;
            let data: DatasetData = serde_json::from_reader(BufReader::new(file))?;
            catalog
                .records
                .insert(record.id.clone(), (record, Arc::new(data)));
        }
        Ok(catalog)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn data_path(&self, id: &str) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join("datasets").join(format!("{id}.json")))
    }

    fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IngestError> {
        let tmp = path.with_extension("tmp");
        {
            let file = File::create(&tmp).map_err(|e| IngestError::io(&tmp, e))?;
            let mut out = BufWriter::new(file);
            serde_json::to_writer(&mut out, value)?;
            out.flush().map_err(|e| IngestError::io(&tmp, e))?;
        }
        fs::rename(&tmp, path).map_err(|e| IngestError::io(path, e))
    }

    fn persist_index(&self) -> Result<(), IngestError> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let index = Index {
            version: INDEX_VERSION,
            next_id: self.next_id,
            records: self.records.values().map(|(r, _)| r.clone()).collect(),
        };
        Self::write_json(&dir.join(INDEX_FILE), &index)
    }

    /// Adds a dataset and returns its new id.
    pub fn register(
        &mut self,
        name: impl Into<String>,
        origin: Option<String>,
        data: DatasetData,
    ) -> Result<String, IngestError> {
        let id = format!("ds-{}", self.next_id);
        let record = DatasetRecord {
            id: id.clone(),
            name: name.into(),
            kind: data.kind(),
            origin,
            loaded_at: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            sample_count: data.sample_count(),
        };
        if let Some(path) = self.data_path(&id) {
            Self::write_json(&path, &data)?;
        }
        self.next_id += 1;
        self.records.insert(id.clone(), (record, Arc::new(data)));
        if let Err(e) = self.persist_index() {
            self.records.remove(&id);
            return Err(e);
        }
        Ok(id)
    }

    /// Records in id order of registration.
    pub fn list(&self) -> Vec<DatasetRecord> {
        let mut out: Vec<DatasetRecord> = self.records.values().map(|(r, _)| r.clone()).collect();
        out.sort_by_key(|r| {
            r.id.trim_start_matches("ds-")
                .parse::<u64>()
                .unwrap_or(u64::MAX)
        });
        out
    }

    pub fn record(&self, id: &str) -> Result<&DatasetRecord, IngestError> {
        self.records
            .get(id)
            .map(|(r, _)| r)
            .ok_or_else(|| IngestError::NotFound(id.to_string()))
    }

    pub fn data(&self, id: &str) -> Result<Arc<DatasetData>, IngestError> {
        self.records
            .get(id)
            .map(|(_, d)| Arc::clone(d))
            .ok_or_else(|| IngestError::NotFound(id.to_string()))
    }

    /// The event series registered under `id`.
    pub fn get(&self, id: &str) -> Result<&EventSeries, IngestError> {
        match self.records.get(id) {
            None => Err(IngestError::NotFound(id.to_string())),
            Some((_, data)) => match data.as_ref() {
                DatasetData::Events(s) => Ok(s),
                DatasetData::RawSeries(_) => Err(IngestError::NotEvents(id.to_string())),
            },
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
