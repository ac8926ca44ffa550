//! Versioned JSON cache file for precomputed grids.
//!
//! Floats are written with shortest round-trip formatting and parsed with
//! exact rounding, so measure values survive a round trip bit for bit.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{GridRow, PeriodGrid};
use crate::histogram::BinAggregation;

pub const CACHE_FORMAT: &str = "phasefold-grid";
pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("grid cache I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("grid cache is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported grid cache: {0}")]
    Format(String),
    #[error(transparent)]
    Grid(#[from] crate::Error),
}

/// Identity of a cached grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridCacheKey {
    pub dataset_id: String,
    pub bin_count: usize,
    pub aggregation: BinAggregation,
}

impl GridCacheKey {
    /// A filesystem-safe file name for this key.
    pub fn file_name(&self) -> String {
        let agg: String = self
            .aggregation
            .to_string()
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        let id: String = self
            .dataset_id
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        format!("{id}__n{}__{agg}.grid.json", self.bin_count)
    }
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format: String,
    version: u32,
    key: GridCacheKey,
    lower_bound: f64,
    upper_bound: f64,
    rows: Vec<GridRow>,
}

/// Writes the grid atomically (temporary file, then rename).
pub fn write_grid_cache(
    path: &Path,
    key: &GridCacheKey,
    grid: &PeriodGrid,
) -> Result<(), CacheError> {
    if key.bin_count != grid.bin_count() || &key.aggregation != grid.aggregation() {
        return Err(CacheError::Format(
            "cache key does not describe this grid".into(),
        ));
    }
    let file = CacheFile {
        format: CACHE_FORMAT.to_string(),
        version: CACHE_VERSION,
        key: key.clone(),
        lower_bound: grid.lower_bound(),
        upper_bound: grid.upper_bound(),
        rows: grid.rows().to_vec(),
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut out = BufWriter::new(File::create(&tmp)?);
        serde_json::to_writer(&mut out, &file)?;
        out.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn read_grid_cache(path: &Path) -> Result<(GridCacheKey, PeriodGrid), CacheError> {
    let file: CacheFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    if file.format != CACHE_FORMAT {
        return Err(CacheError::Format(format!(
            "unknown format `{}`",
            file.format
        )));
    }
    if file.version != CACHE_VERSION {
        return Err(CacheError::Format(format!(
            "version {} (expected {CACHE_VERSION})",
            file.version
        )));
    }
    let grid = PeriodGrid::from_parts(
        file.rows,
        file.key.bin_count,
        file.key.aggregation.clone(),
        file.lower_bound,
        file.upper_bound,
    )?;
    Ok((file.key, grid))
}
