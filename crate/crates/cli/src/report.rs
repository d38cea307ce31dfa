use std::fmt;
use std::path::Path;

use clap::ValueEnum;
use hebb_dual::learners::{EpochRecord, LearnerSnapshot, Schedule};
use hebb_dual::{DatasetMeta, DynamicsConfig};
use serde::{Deserialize, Serialize};

use crate::checks::Verification;
use crate::error::{CliError, Result};

pub const TOOL_NAME: &str = "hebb-dual";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Per-epoch CSV header.
pub const CSV_HEADER: [&str; 7] = [
    "epoch",
    "primal_objective",
    "dual_objective",
    "duality_gap",
    "mean_update_norm",
    "update_density",
    "train_error",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Ridge,
    Svm,
    Logistic,
    Expgrad,
    Sm,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Ridge => "ridge",
            ModelKind::Svm => "svm",
            ModelKind::Logistic => "logistic",
            ModelKind::Expgrad => "expgrad",
            ModelKind::Sm => "sm",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub epochs: usize,
    /// Learning rate (feedforward rate for similarity matching).
    pub eta: f64,
    pub eta_m: Option<f64>,
    pub kappa: Option<f64>,
    /// Regularization strength of the oracles and reported objectives.
    pub lambda: f64,
    pub lambda_eff: Option<f64>,
    pub m: Option<usize>,
    pub normalize: Option<bool>,
    pub schedule: Schedule,
    pub seed: u64,
    pub shuffle: bool,
    pub dynamics: DynamicsConfig<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub epoch: usize,
    pub learning_rate: f64,
    pub primal_objective: Option<f64>,
    pub dual_objective: Option<f64>,
    pub duality_gap: Option<f64>,
    pub mean_update_norm: f64,
    pub max_update_norm: f64,
    pub update_density: f64,
    pub train_error: Option<f64>,
    pub max_dynamics_iters: usize,
}

impl From<&EpochRecord<f64>> for Row {
    fn from(r: &EpochRecord<f64>) -> Self {
        Self {
            epoch: r.epoch,
            learning_rate: r.learning_rate,
            primal_objective: r.primal_objective,
            dual_objective: r.dual_objective,
            duality_gap: r.duality_gap,
            mean_update_norm: r.mean_update_norm,
            max_update_norm: r.max_update_norm,
            update_density: r.update_density,
            train_error: r.train_error,
            max_dynamics_iters: r.max_dynamics_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dataset: DatasetMeta,
    pub data_seed: u64,
    pub run_seed: u64,
    pub tool: String,
    pub version: String,
}

/// Everything `train` writes about one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: ModelKind,
    pub hyperparameters: Hyperparameters,
    pub rows: Vec<Row>,
    pub initial_state: LearnerSnapshot<f64>,
    pub final_state: LearnerSnapshot<f64>,
    pub verification: Verification,
    pub provenance: Provenance,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        hebb_dual::json::to_json_string(self).map_err(|e| CliError::Internal(format!("cannot serialize report: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Malformed {
            path: path.to_path_buf(),
            msg: format!("not a run report: {e}"),
        })
    }

    /// Per-epoch rows in CSV; undefined metrics are empty cells.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Internal(format!("cannot format CSV: {e}"));
        w.write_record(CSV_HEADER).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.epoch.to_string(),
                opt_cell(r.primal_objective),
                opt_cell(r.dual_objective),
                opt_cell(r.duality_gap),
                num_cell(r.mean_update_norm),
                num_cell(r.update_density),
                opt_cell(r.train_error),
            ])
            .map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Internal(format!("cannot format CSV: {e}")))
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn num_cell(v: f64) -> String {
    format!("{v}")
}

pub fn opt_cell(v: Option<f64>) -> String {
    v.map(num_cell).unwrap_or_default()
}

pub fn schedule_label(s: &Schedule) -> String {
    match s {
        Schedule::Constant => "constant".into(),
        Schedule::InverseTime { decay } => format!("inverse-time({})", num_cell(*decay)),
    }
}
