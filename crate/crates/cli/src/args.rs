use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "avwc", version, about = "Secrecy-capacity bounds and desk-scale coding experiments for arbitrarily varying wiretap channels")]
pub struct Cli {
    /// Seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file (written atomically); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for grid points.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Lower and upper secrecy bounds, with and without receiver state knowledge.
    Bounds(BoundsArgs),
    /// Degradation and less-noisy grades of a wiretap pair.
    Classify(ClassifyArgs),
    /// Exact decoding errors of a random codebook under a jammer.
    Simulate(SimulateArgs),
    /// Codebook partitioning and exact leakage.
    Partition(PartitionArgs),
    /// Parameter sweep of a bundled example.
    Sweep(SweepArgs),
    /// Write a preset as a channel file.
    Export(ExportArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SourceArgs {
    /// Wiretap-pair file.
    #[arg(long, conflicts_with_all = ["family", "preset"])]
    pub pair: Option<PathBuf>,
    /// Single-family file.
    #[arg(long, conflicts_with = "preset")]
    pub family: Option<PathBuf>,
    /// Bundled instance: example-6.1, example-6.2, remark-3.1, prop-3.1-example,
    /// degradation-weak, degradation-strong.
    #[arg(long)]
    pub preset: Option<String>,
    /// Fixed q for example-6.2 (default 2p(1−p)).
    #[arg(long)]
    pub q: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GridArgs {
    /// Parameter grid START:STOP:STEP.
    #[arg(long, conflicts_with_all = ["values", "param"])]
    pub grid: Option<String>,
    /// Comma-separated parameter values.
    #[arg(long, conflicts_with = "param")]
    pub values: Option<String>,
    /// Single parameter value.
    #[arg(long)]
    pub param: Option<f64>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SearchArgs {
    /// Auxiliary alphabet size (default |X|).
    #[arg(long)]
    pub cardinality: Option<usize>,
    /// Finest lattice denominator of the prefix search.
    #[arg(long, default_value_t = 32)]
    pub resolution_cap: usize,
    /// Local-search starts of the prefix search.
    #[arg(long, default_value_t = 128)]
    pub starts: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Per-state costs (comma-separated) for a cost-constrained jammer.
    #[arg(long, requires = "budget")]
    pub cost: Option<String>,
    #[arg(long, requires = "cost")]
    pub budget: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Lattice denominator for mixture comparisons.
    #[arg(long, default_value_t = 8)]
    pub resolution: usize,
    /// Evaluation budget of each less-noisy search.
    #[arg(long, default_value_t = 2000)]
    pub budget: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviationArg {
    Relative,
    Absolute,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderArg {
    /// Receiver knows the state sequence.
    Csr,
    /// Typicality decoder for one fixed state mixture.
    Mixture,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JammerArg {
    Exhaustive,
    Greedy,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct TypicalityArgs {
    #[arg(long, default_value_t = 0.9)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    #[arg(long, value_enum, default_value_t = DeviationArg::Relative)]
    pub deviation: DeviationArg,
    /// Input law (comma-separated, default uniform).
    #[arg(long)]
    pub px: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub param: Option<f64>,
    /// Block length N.
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    /// Codebook size L′.
    #[arg(long, default_value_t = 4)]
    pub size: usize,
    #[command(flatten)]
    pub typicality: TypicalityArgs,
    #[arg(long, default_value_t = 0.05)]
    pub nu2: f64,
    #[arg(long, value_enum, default_value_t = DecoderArg::Csr)]
    pub decoder: DecoderArg,
    /// Mixture for the mixture decoder (comma-separated, default uniform).
    #[arg(long)]
    pub mixture: Option<String>,
    /// Draw codewords without repeats.
    #[arg(long)]
    pub distinct: bool,
    /// Monte Carlo trials at the worst state (0 skips).
    #[arg(long, default_value_t = 0)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = JammerArg::Exhaustive)]
    pub jammer: JammerArg,
}

#[derive(Args, Debug, Serialize)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub param: Option<f64>,
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, default_value_t = 32)]
    pub size: usize,
    /// Number of bins L.
    #[arg(long, default_value_t = 2)]
    pub bins: usize,
    #[command(flatten)]
    pub typicality: TypicalityArgs,
    #[arg(long, default_value_t = 0.01)]
    pub nu1: f64,
    #[arg(long, default_value_t = 0.01)]
    pub nu2: f64,
    /// Fixed ν₃; calibrated per code when absent.
    #[arg(long)]
    pub nu3: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub tau: f64,
    /// Number of code indices.
    #[arg(long, default_value_t = 1)]
    pub codes: usize,
    /// Coloring draws per code.
    #[arg(long, default_value_t = 10_000)]
    pub coloring_budget: usize,
    #[arg(long)]
    pub distinct: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    /// example-6.1 or example-6.2.
    #[arg(long)]
    pub preset: String,
    #[arg(long)]
    pub q: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Lattice denominator for the degradation grade.
    #[arg(long, default_value_t = 8)]
    pub resolution: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct ExportArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub param: Option<f64>,
}
