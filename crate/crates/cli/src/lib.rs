//! Command-line harness: generate datasets, train learners, verify runs
//! against batch oracles and merge run reports.

pub mod checks;
pub mod commands;
pub mod error;
pub mod output;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::{CliError, Result};
pub use report::{ModelKind, RunReport};

#[derive(Debug, Parser)]
#[command(name = "hebb-dual", version, about = "Online Hebbian learners checked against their duals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded synthetic dataset.
    Gen(GenArgs),
    /// Train a learner online and write a run report plus per-epoch CSV.
    Train(TrainArgs),
    /// Recompute oracle checks for a run report.
    Verify(VerifyArgs),
    /// Merge run reports into one comparison table.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Regression,
    Classification,
    Spiked,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Label noise standard deviation (regression).
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Draw positive planted weights (regression).
    #[arg(long)]
    pub positive_w: bool,
    /// Minimum signed margin of every point (classification).
    #[arg(long, default_value_t = 0.5)]
    pub margin: f64,
    /// Dimension of the planted subspace (spiked).
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Variance ratio between planted and remaining directions (spiked).
    #[arg(long, default_value_t = 4.0)]
    pub gap: f64,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleArg {
    Constant,
    InverseTime,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Learning rate (feedforward rate for `sm`).
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// SVM dual coefficient.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Regularization strength used by the oracles and reported objectives.
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,
    /// Weight decay in the ridge rule; 0 is the plain Hebbian update.
    #[arg(long, default_value_t = 0.0)]
    pub lambda_eff: f64,
    /// Lateral learning rate for `sm` (defaults to `--eta`).
    #[arg(long)]
    pub eta_m: Option<f64>,
    /// Output dimension for `sm` (defaults to the dataset's planted `m`).
    #[arg(long)]
    pub m: Option<usize>,
    /// Rescale multiplicative weights to sum to one after each step.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Constant)]
    pub schedule: ScheduleArg,
    /// Decay of the inverse-time schedule `eta / (1 + decay * epoch)`.
    #[arg(long, default_value_t = 1.0)]
    pub decay: f64,
    /// Run seed (network initialization and sample shuffling).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Visit samples in a seeded random order each epoch.
    #[arg(long)]
    pub shuffle: bool,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
    /// Per-epoch CSV path (defaults to the report path with a `.csv` extension).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    pub tol_weights: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_gap: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_span: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_fixed_point: f64,
    /// Batch-dual KKT and fixed-point tolerance for `svm` and `logistic`.
    #[arg(long, default_value_t = 1e-5)]
    pub tol_dual: f64,
    #[arg(long, default_value_t = 0.1)]
    pub tol_subspace: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tol_mse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    #[arg(short = 'o', long = "output")]
    pub output: PathBuf,
    /// Defaults to `json` when the output ends in `.json`, `csv` otherwise.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

/// Runs one command, printing its human-readable output to stdout.
/// `Ok(false)` means the command ran but reported failing checks.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen(a) => commands::gen(&a).map(|_| true),
        Command::Train(a) => commands::train(&a).map(|_| true),
        Command::Verify(a) => commands::verify(&a),
        Command::Report(a) => commands::report(&a).map(|_| true),
    }
}
