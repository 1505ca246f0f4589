use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "qcldpc",
    version,
    about = "Quantum QC-LDPC codes under joint BP decoding"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and validate a code, or scan circulant sizes for girth-6 codes.
    Code(CodeArgs),
    /// Monte Carlo FER/BER sweep over physical error rates.
    Simulate(SimulateArgs),
    /// Residual-weight statistics from failure logs.
    Floor(FloorArgs),
    /// Hashing-bound depolarizing probability for a code rate.
    Bound(BoundArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CodeSource {
    /// Use the built-in J = 3, L = 8 exponent pair.
    #[arg(long = "builtin-3x8", conflicts_with = "pair")]
    pub builtin_3x8: bool,
    /// Exponent-pair text file.
    #[arg(long, value_name = "FILE")]
    pub pair: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CodeArgs {
    #[command(flatten)]
    pub source: CodeSource,
    /// Circulant size.
    #[arg(long = "p", value_name = "INT", conflicts_with = "scan_p")]
    pub p: Option<usize>,
    /// Inclusive circulant range `A..B`.
    #[arg(long = "scan-p", value_name = "A..B")]
    pub scan_p: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: CodeSource,
    /// TOML configuration, or a manifest from an earlier run.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long = "p", value_name = "INT")]
    pub p: Option<usize>,
    /// Comma-separated physical error rates.
    #[arg(long = "p-grid", value_name = "a,b,c")]
    pub p_grid: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    #[arg(long = "llr-clip")]
    pub llr_clip: Option<f64>,
    #[arg(long)]
    pub damping: Option<f64>,
    #[arg(long = "min-frame-errors")]
    pub min_frame_errors: Option<u64>,
    #[arg(long = "max-trials")]
    pub max_trials: Option<u64>,
    /// Failure records kept per point in the failure log.
    #[arg(long = "failure-log-cap")]
    pub failure_log_cap: Option<usize>,
    /// Worker threads (default: machine parallelism). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory for results.csv, failures.jsonl and manifest.toml.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FloorArgs {
    /// Failure logs (JSON lines) written by `simulate`.
    #[arg(required = true, value_name = "LOG")]
    pub logs: Vec<PathBuf>,
    /// Row weight L of the code.
    #[arg(long = "l")]
    pub l: usize,
    /// Comma-separated multipliers k; reports the fraction with at most k*L bit errors.
    #[arg(long = "k", default_value = "1,2,3")]
    pub k: String,
    /// Only count failures with p_d >= this value.
    #[arg(long = "p-min")]
    pub p_min: Option<f64>,
    /// Only count failures with p_d <= this value.
    #[arg(long = "p-max")]
    pub p_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long, conflicts_with_all = ["j", "l"])]
    pub rate: Option<f64>,
    #[arg(long = "j", requires = "l")]
    pub j: Option<usize>,
    #[arg(long = "l", requires = "j")]
    pub l: Option<usize>,
}
