//! `trajbench`: ingest, preprocess, protect, evaluate and audit trajectory
//! datasets from the command line.
//!
//! Exit codes: 0 on success, 1 when `--strict` is set and a metric threshold
//! or audit verdict fails, 2 on usage and I/O errors.

mod args;
mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use args::*;

#[derive(Parser, Debug)]
#[command(name = "trajbench", version, about = "Trajectory privacy and utility benchmarking")]
pub struct Cli {
    /// Flat `key = value` file supplying option defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Exit with status 1 when a threshold or audit verdict fails.
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convert a source dataset to the canonical CSV + sidecar format.
    Ingest(IngestArgs),
    /// Bounding-box filter, resample, split, truncate, drop short, normalize.
    Preprocess(PreprocessArgs),
    /// Apply a privacy mechanism.
    Protect(ProtectArgs),
    /// Score a generated or protected dataset against the real one.
    Evaluate(EvaluateArgs),
    /// Empirically lower-bound a mechanism's epsilon.
    Audit(AuditArgs),
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[arg(long)]
    pub format: Option<InputFormat>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// MIN_LAT,MAX_LAT,MIN_LON,MAX_LON [default: Beijing 5th ring road]
    #[arg(long, allow_hyphen_values = true)]
    pub bbox: Option<Bbox>,
    /// Resampling interval in seconds [default: 5]
    #[arg(long)]
    pub interval: Option<i64>,
    /// Split on gaps of at least this many seconds [default: 60]
    #[arg(long)]
    pub gap: Option<i64>,
    /// [default: 200]
    #[arg(long = "max-len")]
    pub max_len: Option<usize>,
    /// [default: 10]
    #[arg(long = "min-len")]
    pub min_len: Option<usize>,
    /// paper|minmax|none [default: none]
    #[arg(long)]
    pub normalize: Option<Normalize>,
}

#[derive(Args, Debug)]
pub struct ProtectArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// cnoise|planar-laplace|noisy-count-flawed|noisy-count-correct
    #[arg(long)]
    pub mechanism: Option<Mechanism>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-coordinate L1 sensitivity for cnoise, in noise units [default: 1]
    #[arg(long)]
    pub sensitivity: Option<f64>,
    /// auto|meters|native [default: auto]
    #[arg(long)]
    pub units: Option<Units>,
    /// Count grid NX,NY [default: 50,50]
    #[arg(long)]
    pub grid: Option<Grid>,
    /// none|clamp-nonneg, for noisy-count-correct [default: clamp-nonneg]
    #[arg(long)]
    pub postprocess: Option<PostProcessArg>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub real: Option<PathBuf>,
    #[arg(long)]
    pub gen: Option<PathBuf>,
    /// Comma-separated metric names, or `all` [default: all]
    #[arg(long)]
    pub metrics: Option<MetricList>,
    /// Histogram grid NX,NY [default: 50,50]
    #[arg(long)]
    pub grid: Option<Grid>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write SVG figures into this directory.
    #[arg(long)]
    pub plots: Option<PathBuf>,
    /// Hotspot cells compared [default: 10]
    #[arg(long)]
    pub k: Option<usize>,
    /// Sliced-Wasserstein projections [default: 100]
    #[arg(long = "n-proj")]
    pub n_proj: Option<usize>,
    /// Range queries [default: 200]
    #[arg(long)]
    pub queries: Option<usize>,
    /// Range-query radius as a fraction of the bbox diagonal [default: 0.05]
    #[arg(long = "radius-frac")]
    pub radius_frac: Option<f64>,
    /// NAME=VALUE upper limit on a metric; repeatable.
    #[arg(long = "threshold")]
    pub thresholds: Vec<Threshold>,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    /// Not needed for randomized-response.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// cnoise|planar-laplace|noisy-count-flawed|noisy-count-correct|randomized-response
    #[arg(long)]
    pub mechanism: Option<Mechanism>,
    /// user|instance|location|multi:W [default: location]
    #[arg(long)]
    pub uop: Option<Uop>,
    /// [default: 10000]
    #[arg(long)]
    pub trials: Option<usize>,
    /// auto|cell-nonzero|cell-above|halfspace|near|report-true [default: auto]
    #[arg(long)]
    pub event: Option<Event>,
    /// [default: 0.95]
    #[arg(long)]
    pub confidence: Option<f64>,
    /// Mechanism epsilon.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Claimed epsilon the verdict is taken against [default: --epsilon]
    #[arg(long = "claimed-epsilon")]
    pub claimed_epsilon: Option<f64>,
    /// [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// random|user:ID|traj:ID|loc:TRAJ_ID:INDEX [default: random]
    #[arg(long)]
    pub target: Option<Target>,
    /// Count grid NX,NY [default: 50,50]
    #[arg(long)]
    pub grid: Option<Grid>,
    /// Released count must exceed this for cell-above [default: 0.5]
    #[arg(long = "cell-threshold")]
    pub cell_threshold: Option<f64>,
    /// A,B,C for the halfspace event `A*lat + B*lon >= C`.
    #[arg(long, allow_hyphen_values = true)]
    pub halfspace: Option<Halfspace>,
    /// Radius of the near event, in meters (normalized units for normalized
    /// data) [default: half the gap to the nearest remaining point]
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub sensitivity: Option<f64>,
    #[arg(long)]
    pub units: Option<Units>,
    #[arg(long)]
    pub postprocess: Option<PostProcessArg>,
    /// Write the report here as well as to standard output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(commands::Outcome::Pass) => ExitCode::SUCCESS,
        Ok(commands::Outcome::StrictFailure) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
