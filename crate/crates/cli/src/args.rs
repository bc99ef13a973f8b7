use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mweica::harness::{SourceKind, DEFAULT_CONDITION_BOUND};

#[derive(Debug, Parser)]
#[command(name = "mweica", version, about = "Blind source separation by multiple Gaussian weightings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mix sources with a seeded random matrix.
    Mix(MixArgs),
    /// Recover sources from mixed signals.
    Unmix(UnmixArgs),
    /// Independence index of a data set.
    Index(IndexArgs),
    /// Seeded mix, unmix and score rounds for several methods.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Mweica,
    Weica,
    Fastica,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Mweica => "mweica",
            Method::Weica => "weica",
            Method::Fastica => "fastica",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Uniform,
    Laplace,
    SineMixture,
    Bimodal,
}

impl From<SourceArg> for SourceKind {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Uniform => SourceKind::Uniform,
            SourceArg::Laplace => SourceKind::Laplace,
            SourceArg::SineMixture => SourceKind::SineMixture,
            SourceArg::Bimodal => SourceKind::Bimodal,
        }
    }
}

/// Solver settings shared by `unmix` and `bench`. Unset values fall back to
/// the defaults of the chosen method.
#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Weight points; defaults to min(32, samples).
    #[arg(long)]
    pub n_weights: Option<usize>,
    /// Convergence tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Sweep budget (iteration budget for fastica).
    #[arg(long)]
    pub max_sweeps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MixArgs {
    /// Source files (.csv, .wav or .pgm); columns or images are stacked.
    pub inputs: Vec<PathBuf>,
    /// Synthesize sources of this family instead of reading files.
    #[arg(long, value_enum, conflicts_with = "inputs")]
    pub source: Option<SourceArg>,
    /// Number of synthesized sources.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Number of synthesized samples.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_CONDITION_BOUND)]
    pub condition_bound: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct UnmixArgs {
    /// Mixed signals (.csv, .wav or .pgm).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Method::Mweica)]
    pub method: Method,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Original sources to score the result against.
    #[arg(long, num_args = 1..)]
    pub reference: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Weight points averaged over.
    #[arg(long, default_value_t = 32)]
    pub n_weights: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Method::Mweica, Method::Weica, Method::Fastica])]
    pub methods: Vec<Method>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = SourceArg::Uniform)]
    pub source: SourceArg,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Sample sizes to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [10_000])]
    pub samples: Vec<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Seed of trial 0; trial t uses seed + t.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_CONDITION_BOUND)]
    pub condition_bound: f64,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub out: PathBuf,
}
