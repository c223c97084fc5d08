//! CSV tables and their JSON sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// Serializes rows under an explicit header so empty tables still carry
/// their columns.
pub fn csv_string<T: Serialize>(columns: &[&str], rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Parse(format!("csv: {e}"));
    w.write_record(columns).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    /// Source revision, taken from `OAC_BUILD_ID` at compile time.
    pub build: String,
    pub preset: String,
    pub seed: u64,
    pub columns: Vec<String>,
    pub config: serde_json::Value,
    pub notes: Vec<String>,
}

impl RunMetadata {
    pub fn new(preset: &str, seed: u64, columns: &[&str], config: serde_json::Value) -> Self {
        RunMetadata {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            build: option_env!("OAC_BUILD_ID").unwrap_or("unknown").to_string(),
            preset: preset.to_string(),
            seed,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            config,
            notes: Vec::new(),
        }
    }
}

/// One output table: `<name>.csv` and `<name>.json`.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub csv: String,
    pub metadata: String,
}

impl Artifact {
    pub fn new<T: Serialize>(name: &str, columns: &[&str], rows: &[T], meta: &RunMetadata) -> Result<Self> {
        Ok(Artifact {
            name: name.to_string(),
            csv: csv_string(columns, rows)?,
            metadata: serde_json::to_string_pretty(meta)? + "\n",
        })
    }

    pub fn csv_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.csv", self.name))
    }

    pub fn metadata_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.json", self.name))
    }

    /// Writes both files, creating `dir` if needed.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(self.csv_path(dir), &self.csv)?;
        fs::write(self.metadata_path(dir), &self.metadata)?;
        Ok(())
    }
}
