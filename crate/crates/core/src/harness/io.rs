use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, OutputFormat};
use super::run::{ExperimentOutput, MetricsRecord, TraceRecord};
use crate::error::{Error, Result};

pub const RECORD_COLUMNS: [&str; 18] = [
    "estimator",
    "snr_db",
    "trial",
    "nmse",
    "ber",
    "iterations",
    "k_hat",
    "adds",
    "deletes",
    "reestimates",
    "wall_time_s",
    "mse",
    "n_pilots",
    "grid_l",
    "bit_errors",
    "n_bits",
    "converged",
    "flagged",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub git_rev: String,
    pub config: BTreeMap<String, String>,
    /// Puncturing keep-mask per sweep point.
    pub puncture_masks: BTreeMap<String, String>,
}

impl Metadata {
    pub fn new(cfg: &ExperimentConfig, puncture_masks: BTreeMap<String, String>) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            git_rev: option_env!("SPARSECHAN_GIT_REV").unwrap_or("unknown").to_string(),
            config: cfg.echo(),
            puncture_masks,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonDocument {
    metadata: Metadata,
    records: Vec<MetricsRecord>,
    traces: Vec<TraceRecord>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

/// Writes the run into `dir`. CSV: `records.csv`, `traces.csv` (when traces
/// exist) and `metadata.json`; JSON: a single `results.json`.
pub fn emit(out: &ExperimentOutput, dir: &Path, format: OutputFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    match format {
        OutputFormat::Csv => {
            let p = dir.join("records.csv");
            if out.records.is_empty() {
                fs::write(&p, RECORD_COLUMNS.join(",") + "\n").map_err(|e| io_err(&p, e))?;
            } else {
                write_csv(&p, &out.records)?;
            }
            written.push(p);
            if !out.traces.is_empty() {
                let p = dir.join("traces.csv");
                write_csv(&p, &out.traces)?;
                written.push(p);
            }
            let p = dir.join("metadata.json");
            write_json(&p, &out.metadata)?;
            written.push(p);
        }
        OutputFormat::Json => {
            let p = dir.join("results.json");
            let doc = JsonDocument {
                metadata: out.metadata.clone(),
                records: out.records.clone(),
                traces: out.traces.clone(),
            };
            write_json(&p, &doc)?;
            written.push(p);
        }
    }
    Ok(written)
}

pub fn read_records_csv(path: &Path) -> Result<Vec<MetricsRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let header: Vec<String> = r.headers().map_err(|e| io_err(path, e))?.iter().map(str::to_string).collect();
    if header != RECORD_COLUMNS {
        return Err(io_err(path, format!("unexpected header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(|e| io_err(path, e))).collect()
}

pub fn read_records_json(path: &Path) -> Result<Vec<MetricsRecord>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let doc: JsonDocument = serde_json::from_str(&text).map_err(|e| io_err(path, e))?;
    Ok(doc.records)
}
