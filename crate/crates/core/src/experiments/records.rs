//! Result records and their CSV/JSON persistence.
//!
//! Columns of the sweep CSV, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `baud_rate` | symbols/s |
//! | `order_n` | Hadamard order; `1` marks the classical homodyne baseline |
//! | `model_kind` | `wrapped-normal` or `von-mises` |
//! | `sigma2_or_kappa` | noise parameter of that model |
//! | `alpha_rx` | received amplitude, `sqrt(photons per pulse)` |
//! | `epsilon` | detection threshold; empty on classical rows |
//! | `mi_bits_per_use` | bits per block of `n` pulses (per pulse when `order_n = 1`) |
//! | `capacity_bits_per_s` | `b * mi / n` |
//! | `std_error` | Monte-Carlo standard error of `capacity_bits_per_s` |
//! | `phase_samples`, `mi_samples` | sample budgets |
//! | `repetition_index`, `seed` | repetition and the seed of its random stream |
//! | `status` | `ok`, or the error that left the numeric fields empty |

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::{Error, ModelKind, Result};

/// `order_n` of classical baseline rows.
pub const CLASSICAL_ORDER: usize = 1;

pub const STATUS_OK: &str = "ok";

pub const SWEEP_COLUMNS: [&str; 14] = [
    "baud_rate",
    "order_n",
    "model_kind",
    "sigma2_or_kappa",
    "alpha_rx",
    "epsilon",
    "mi_bits_per_use",
    "capacity_bits_per_s",
    "std_error",
    "phase_samples",
    "mi_samples",
    "repetition_index",
    "seed",
    "status",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResultRecord {
    pub baud_rate: f64,
    pub order_n: usize,
    pub model_kind: ModelKind,
    pub sigma2_or_kappa: f64,
    pub alpha_rx: f64,
    pub epsilon: Option<f64>,
    pub mi_bits_per_use: Option<f64>,
    pub capacity_bits_per_s: Option<f64>,
    pub std_error: Option<f64>,
    pub phase_samples: usize,
    pub mi_samples: usize,
    pub repetition_index: usize,
    pub seed: u64,
    pub status: String,
}

impl SweepResultRecord {
    pub fn is_classical(&self) -> bool {
        self.order_n == CLASSICAL_ORDER
    }

    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }
}

/// Tail-probability check of the concentration bound at one `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRecord {
    pub order_n: usize,
    pub model_kind: ModelKind,
    pub sigma2_or_kappa: f64,
    /// `on` (signal port) or `off` (an empty port).
    pub port: String,
    pub t: f64,
    pub trials: usize,
    pub empirical_tail: f64,
    pub mc_std_error: f64,
    pub bound: f64,
    pub pass: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub order_n: usize,
    pub baud_rate: f64,
    pub model_kind: ModelKind,
    pub sigma2_or_kappa: f64,
    pub alpha_rx: f64,
    pub m1: f64,
    pub epsilon_max: f64,
    pub objective: f64,
    /// `epsilon_max / (sqrt(n) alpha m1 / 2)`.
    pub half_mean_ratio: f64,
}

/// Serializes records to RFC-4180 CSV with a header row.
pub fn to_csv_string<T: Serialize>(records: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Config(format!("CSV buffer: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// What to do when the output file already exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExistingOutput {
    Refuse,
    Append,
}

#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub metadata: PathBuf,
}

impl OutputPaths {
    pub fn new(dir: &Path, stem: &str) -> Self {
        Self {
            csv: dir.join(format!("{stem}.csv")),
            metadata: dir.join(format!("{stem}.json")),
        }
    }
}

/// First unused repetition index in an existing sweep CSV, or `0`.
pub fn next_repetition_index(path: &Path) -> Result<usize> {
    if !path.exists() {
        return Ok(0);
    }
    let rows: Vec<SweepResultRecord> = read_csv(path)?;
    Ok(rows
        .iter()
        .map(|r| r.repetition_index + 1)
        .max()
        .unwrap_or(0))
}

/// Writes `records` to `paths.csv` and the run metadata next to it.
///
/// With [`ExistingOutput::Refuse`] an existing CSV is an error; with
/// [`ExistingOutput::Append`] rows are appended without a second header.
pub fn write_records<T: Serialize>(
    records: &[T],
    paths: &OutputPaths,
    mode: ExistingOutput,
    metadata: &serde_json::Value,
) -> Result<()> {
    if let Some(dir) = paths.csv.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let exists = paths.csv.exists();
    if exists && mode == ExistingOutput::Refuse {
        return Err(Error::OutputExists {
            path: paths.csv.clone(),
        });
    }
    let body = to_csv_string(records)?;
    if exists {
        let mut f = OpenOptions::new()
            .append(true)
            .open(&paths.csv)
            .map_err(|e| Error::io(&paths.csv, e))?;
        let rows = body.split_once('\n').map_or("", |(_, rest)| rest);
        f.write_all(rows.as_bytes())
            .map_err(|e| Error::io(&paths.csv, e))?;
    } else {
        let mut f = File::create(&paths.csv).map_err(|e| Error::io(&paths.csv, e))?;
        f.write_all(body.as_bytes())
            .map_err(|e| Error::io(&paths.csv, e))?;
    }
    let text = serde_json::to_string_pretty(metadata).expect("metadata is valid JSON");
    std::fs::write(&paths.metadata, text + "\n").map_err(|e| Error::io(&paths.metadata, e))?;
    Ok(())
}

/// Sidecar metadata: the full configuration, tool version, timestamp and
/// any command-specific fields.
pub fn run_metadata(
    cfg: &ExperimentConfig,
    command: &str,
    extra: serde_json::Value,
) -> serde_json::Value {
    serde_json::json!({
        "tool": "jdrsim",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        "config": cfg,
        "columns": SWEEP_COLUMNS,
        "parameters": extra,
    })
}
