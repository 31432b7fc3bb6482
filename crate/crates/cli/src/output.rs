use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

/// Content hash of the resolved config, computed the way git hashes a blob.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let body = cfg.canonical_json();
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", body.len()).as_bytes());
    h.update(body.as_bytes());
    hex::encode(h.finalize())
}

/// Formats an optional number; missing values become empty cells.
pub fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Writes the artifacts of one command into a directory.
pub struct Writer {
    dir: PathBuf,
    config_json: String,
    hash: String,
}

impl Writer {
    pub fn new(dir: &Path, cfg: &ExperimentConfig) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Writer { dir: dir.to_path_buf(), config_json: cfg.canonical_json(), hash: config_hash(cfg) })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// CSV with two comment lines (config and hash) ahead of the header.
    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let mut out = String::new();
        writeln!(out, "# config: {}", self.config_json)?;
        writeln!(out, "# config_sha256: {}", self.hash)?;
        writeln!(out, "{}", header.join(","))?;
        for row in rows {
            debug_assert_eq!(row.len(), header.len());
            writeln!(out, "{}", row.join(","))?;
        }
        self.put(name, &out)
    }

    /// JSON document `{"config": .., "config_sha256": .., "result": ..}`.
    pub fn json<T: Serialize>(&self, name: &str, result: &T) -> Result<PathBuf> {
        let doc = serde_json::json!({
            "config": serde_json::from_str::<serde_json::Value>(&self.config_json)?,
            "config_sha256": self.hash,
            "result": result,
        });
        self.put(name, &(serde_json::to_string_pretty(&doc)? + "\n"))
    }

    fn put(&self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Parsed CSV artifact.
#[derive(Debug, Clone)]
pub struct Table {
    pub config: serde_json::Value,
    pub hash: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let config = lines
            .next()
            .and_then(|l| l.strip_prefix("# config: "))
            .context("missing config line")?;
        let hash = lines
            .next()
            .and_then(|l| l.strip_prefix("# config_sha256: "))
            .context("missing hash line")?;
        let header: Vec<String> = lines.next().context("missing header")?.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (k, line) in lines.enumerate() {
            let row: Vec<String> = line.split(',').map(str::to_string).collect();
            anyhow::ensure!(row.len() == header.len(), "row {k} has {} cells, header has {}", row.len(), header.len());
            rows.push(row);
        }
        Ok(Table { config: serde_json::from_str(config)?, hash: hash.to_string(), header, rows })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header.iter().position(|h| h == name).with_context(|| format!("no column {name}"))
    }

    /// Numeric cells of a column; empty cells are `None`.
    pub fn numbers(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let c = self.column(name)?;
        self.rows
            .iter()
            .map(|r| {
                let s = &r[c];
                if s.is_empty() || s == "unstable" {
                    Ok(None)
                } else {
                    s.parse::<f64>().map(Some).with_context(|| format!("bad number {s:?} in {name}"))
                }
            })
            .collect()
    }
}
