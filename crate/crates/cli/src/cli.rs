use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fmds_core::fmds::{Baseline, InitMode};
use fmds_core::oracle::ScenarioKind;
use fmds_core::Metric;

use crate::manifest::InputFormat;

#[derive(Debug, Parser)]
#[command(name = "fmds", version, about = "Functional multidimensional scaling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Commands,
}

#[derive(Debug, Subcommand)]
pub enum Commands {
    /// Build a dissimilarity tensor from a wide CSV panel.
    Dissim(DissimArgs),
    /// Classical MDS on every time slice.
    Cmds(CmdsArgs),
    /// Fit smooth trajectories to a dissimilarity tensor.
    Fmds(FmdsArgs),
    /// Run the oracle cross-checks.
    Verify(VerifyArgs),
    /// Generate a synthetic scenario.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    WideCsv,
    TensorCsv,
}

impl From<FormatArg> for InputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::WideCsv => Self::WideCsv,
            FormatArg::TensorCsv => Self::TensorCsv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    Correlation,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Euclidean => Self::Euclidean,
            MetricArg::Correlation => Self::Correlation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Cmds,
    Random,
}

impl From<InitArg> for InitMode {
    fn from(i: InitArg) -> Self {
        match i {
            InitArg::Cmds => Self::Cmds,
            InitArg::Random => Self::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineArg {
    Adam,
    Gd,
}

impl From<BaselineArg> for Baseline {
    fn from(b: BaselineArg) -> Self {
        match b {
            BaselineArg::Adam => Self::Adam,
            BaselineArg::Gd => Self::FullBatchGd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    StaticCloud,
    SmoothRotation,
    RandomWalkSmoothed,
}

impl From<ScenarioArg> for ScenarioKind {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::StaticCloud => Self::StaticCloud,
            ScenarioArg::SmoothRotation => Self::SmoothRotation,
            ScenarioArg::RandomWalkSmoothed => Self::RandomWalkSmoothed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Input file.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Input layout; `dissim` defaults to wide-csv, the others to tensor-csv.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Dissimilarity for panel input.
    #[arg(long, value_enum, default_value = "euclidean")]
    pub metric: MetricArg,
    /// Rolling window length in time points (panel input).
    #[arg(long, default_value_t = 1)]
    pub window: usize,
    /// Step between window starts (panel input).
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Leave the timestamp out of SVG files.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DissimArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CmdsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Embedding dimension.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Read the run description from a manifest instead of flags.
    #[arg(long, conflicts_with = "input")]
    pub manifest: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Embedding dimension.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Interior knot count (default max(1, m/10)).
    #[arg(long)]
    pub knots: Option<usize>,
    #[arg(long, default_value_t = 0.001)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.9)]
    pub gamma1: f64,
    #[arg(long, default_value_t = 0.999)]
    pub gamma2: f64,
    /// Convergence tolerance on the per-epoch coefficient displacement.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "cmds")]
    pub init: InitArg,
    #[arg(long, value_enum, default_value = "adam")]
    pub baseline: BaselineArg,
}

#[derive(Debug, Clone, Args)]
pub struct FmdsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub fit: FitArgs,
    /// Read the run description from a manifest instead of flags.
    #[arg(long, conflicts_with = "input")]
    pub manifest: Option<PathBuf>,
    /// Number of points in the dense trajectory grid.
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum, default_value = "smooth-rotation")]
    pub scenario: ScenarioArg,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub p_true: usize,
    #[arg(long, default_value_t = 40)]
    pub m: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}
