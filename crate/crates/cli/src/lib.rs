//! Command-line front end: argument parsing, config resolution, stage
//! dispatch over a run directory, JSON-lines logging and run manifests.

pub mod commands;
pub mod config;
pub mod rundir;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::dispatch;
pub use config::{parse_config, parse_config_over, Overrides};
pub use rundir::RunDir;

#[derive(Debug, Parser)]
#[command(name = "ihas", version, about = "Instance-wise embedding dimension search for CTR models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML file with pipeline settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Raw CSV input (or an encoded dataset written by `ingest`).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Schema TOML describing the CSV columns.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Run directory holding the dataset, checkpoints, logs and reports.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
}

impl Common {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            k: self.k,
            lambda: self.lambda,
            tau: self.tau,
            batch: self.batch,
            epochs: self.epochs,
        }
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Split and encode a CSV into the run directory.
    Ingest(Common),
    /// Write a planted two-group dataset with its schema and ground truth.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        /// Generator settings as TOML; the built-in two-group layout otherwise.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Pretrain the base model and search gates.
    Search(Common),
    /// Cluster masked representations and derive per-cluster widths.
    Cluster(Common),
    /// Train one reduced-width model per cluster.
    Retrain(Common),
    /// Ingest, search, cluster, retrain and evaluate.
    RunAll(Common),
    /// Evaluate the furthest checkpoint on the test split.
    Eval(Common),
    /// Score the rows of `--data` with the routed cluster models.
    Predict(Common),
    /// Print the per-cluster, per-field kept widths.
    InspectDims(Common),
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Ingest(c)
            | Command::Search(c)
            | Command::Cluster(c)
            | Command::Retrain(c)
            | Command::RunAll(c)
            | Command::Eval(c)
            | Command::Predict(c)
            | Command::InspectDims(c) => c,
            Command::Synth { common, .. } => common,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Synth { .. } => "synth",
            Command::Search(_) => "search",
            Command::Cluster(_) => "cluster",
            Command::Retrain(_) => "retrain",
            Command::RunAll(_) => "run-all",
            Command::Eval(_) => "eval",
            Command::Predict(_) => "predict",
            Command::InspectDims(_) => "inspect-dims",
        }
    }
}

/// Process exit status for an error: 2 for stage preconditions, 1 otherwise.
pub fn exit_code(err: &ihas_core::Error) -> i32 {
    if err.category() == "stage-precondition" {
        2
    } else {
        1
    }
}
