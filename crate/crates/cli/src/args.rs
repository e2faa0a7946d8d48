use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use emonet_core::ingest::Task;
use emonet_core::metrics::{NmiDomain, NmiNorm};

#[derive(Debug, Parser)]
#[command(name = "emonet", version, about = "Semantic networks of emotion words from pairwise ratings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic rating CSV with planted wheel structure.
    Synth(SynthArgs),
    /// Filter, build the network, decompose and write an analysis bundle.
    Analyze(AnalyzeArgs),
    /// Render DOT, GraphML or SVG files from an existing bundle.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Similarity,
    Association,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Self {
        match t {
            TaskArg::Similarity => Task::Similarity,
            TaskArg::Association => Task::Association,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Petal24,
    All48,
}

impl From<DomainArg> for NmiDomain {
    fn from(d: DomainArg) -> Self {
        match d {
            DomainArg::Petal24 => NmiDomain::Petal24,
            DomainArg::All48 => NmiDomain::All48,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Arithmetic,
    Max,
}

impl From<NormArg> for NmiNorm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Arithmetic => NmiNorm::Arithmetic,
            NormArg::Max => NmiNorm::Max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum ExportFormat {
    Json,
    Dot,
    Graphml,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Destination CSV.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 960)]
    pub participants: usize,
    #[arg(long, value_enum, default_value_t = TaskArg::Similarity)]
    pub task: TaskArg,
    #[arg(long, env = "EMONET_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 6.5)]
    pub base_within: f64,
    #[arg(long, default_value_t = 0.0)]
    pub base_opposite: f64,
    #[arg(long, default_value_t = 0.5)]
    pub base_other: f64,
    #[arg(long, default_value_t = 0.5)]
    pub noise_sd: f64,
    /// Spread of the fixed per-pair offset shared by all participants.
    #[arg(long, default_value_t = 1.0)]
    pub pair_sd: f64,
    #[arg(long, default_value_t = 0.05)]
    pub careless_rate: f64,
    /// Ordered pairs rated by each participant.
    #[arg(long, default_value_t = 47)]
    pub block_size: usize,
    /// Lexicon CSV replacing the built-in 48 words.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Rating CSV to analyze.
    #[arg(long)]
    pub input: PathBuf,
    /// Second rating CSV for the chi-square and paired t comparisons.
    #[arg(long)]
    pub compare: Option<PathBuf>,
    /// Bundle directory, created if absent.
    #[arg(long)]
    pub out: PathBuf,
    /// Keep only sessions of this task; required when the input mixes tasks.
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
    #[arg(long, default_value_t = 10)]
    pub k_max: usize,
    #[arg(long, default_value_t = 0.001, conflicts_with = "alpha_sweep")]
    pub alpha: f64,
    /// Comma-separated α values; replaces the single decomposition with a sweep table.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub alpha_sweep: Option<Vec<f64>>,
    /// Number of restarts; seeds are `seed, seed+1, ...`.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, env = "EMONET_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = emonet_core::graph::DEFAULT_DAMPING)]
    pub damping: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub prune_eps: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = emonet_core::ingest::DOUBLE_PASS_THRESHOLD)]
    pub double_pass_threshold: f64,
    #[arg(long, value_enum, default_value_t = DomainArg::Petal24)]
    pub nmi_domain: DomainArg,
    #[arg(long, value_enum, default_value_t = NormArg::Arithmetic)]
    pub nmi_norm: NormArg,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json")]
    pub export: Vec<ExportFormat>,
    /// Fill unrated pairs with the global mean score instead of failing.
    #[arg(long)]
    pub impute_missing: bool,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    /// Bundle directory written by `analyze`.
    #[arg(long)]
    pub bundle: PathBuf,
    /// Output directory; defaults to the bundle directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "dot,graphml,svg")]
    pub format: Vec<ExportFormat>,
}
