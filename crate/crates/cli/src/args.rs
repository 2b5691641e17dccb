use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperpstl::smc::TruncationPolicy;

#[derive(Debug, Parser)]
#[command(name = "hpstl", version, about = "Statistical model checking of probabilistic hyper-properties")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check one formula against one model.
    Check(CheckArgs),
    /// Run a benchmark suite repeatedly and summarise accuracy and cost.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    /// Model file (TOML).
    #[arg(long)]
    pub model: PathBuf,
    /// Formula file.
    #[arg(long)]
    pub formula: PathBuf,
    /// Desired significance level, in (0, 1).
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Tuples drawn per operator between significance checks.
    #[arg(long, default_value_t = 10)]
    pub batch: u64,
    /// Simulation horizon; defaults to the model file's `horizon`.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-operator sample cap; reaching it yields `undecided`.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_samples: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Add statistics over the first sampled traces to the report.
    #[arg(long)]
    pub trace_stats: bool,
    /// Include the per-iteration significance log in the report.
    #[arg(long)]
    pub iterations: bool,
    /// Treatment of evaluations that need the path beyond the horizon.
    #[arg(long, value_enum, default_value_t = Truncation::CountFalse)]
    pub truncation_policy: Truncation,
    /// Print the k-th sampled trace (0-based) to stderr before checking.
    #[arg(long, value_name = "K")]
    pub dump_trace: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Truncation {
    /// Count the evaluation as `false`.
    CountFalse,
    /// Abort the run with an error.
    CountError,
}

impl From<Truncation> for TruncationPolicy {
    fn from(t: Truncation) -> Self {
        match t {
            Truncation::CountFalse => TruncationPolicy::CountFalse,
            Truncation::CountError => TruncationPolicy::CountError,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(value_enum)]
    pub suite: crate::bench::Suite,
    /// Repetitions per setup.
    #[arg(long, default_value_t = 20)]
    pub reps: u64,
    /// Base from which per-repetition seeds are derived.
    #[arg(long, default_value_t = 0)]
    pub seed_base: u64,
    /// Emit the summaries and all reports as JSON.
    #[arg(long)]
    pub json: bool,
}
