use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use maxscore_core::{DgpVariant, Optimizer, WeightDistribution};

use crate::hoeffding_cmd::FunctionChoice;

#[derive(Debug, Parser)]
#[command(name = "maxscore", version, about = "Maximum score estimation under multiway clustering")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a complete dataset from a design.
    Simulate(SimulateArgs),
    /// Estimate the direction on a dataset.
    Estimate(EstimateArgs),
    /// Multiplier bootstrap of the estimate.
    Bootstrap(BootstrapArgs),
    /// Run a Monte Carlo study from a TOML config.
    Montecarlo(MonteCarloArgs),
    /// Hoeffding decomposition of a simulated dataset.
    HoeffdingCheck(HoeffdingArgs),
    /// Numerical asymptotic variance of a design.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report file (default: stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long)]
    pub dgp: DgpVariant,
    /// Square grid `n × n`.
    #[arg(long, conflicts_with = "sizes")]
    pub n: Option<usize>,
    /// Grid sizes `N_1,…,N_K`.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    /// Covariate dimension of the continuous designs.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    /// Dataset CSV to create.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConstraintKind {
    Full,
    Hemisphere,
    Component,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset CSV with columns i1..iK, y, x1..xd.
    #[arg(long)]
    pub data: PathBuf,
    /// Outcomes are coded 0/1 (0 becomes -1).
    #[arg(long)]
    pub y01: bool,
    /// Reject datasets with empty grid cells.
    #[arg(long)]
    pub require_complete: bool,
}

#[derive(Debug, Args)]
pub struct EstimatorArgs {
    #[arg(long, default_value = "auto")]
    pub method: Optimizer,
    #[arg(long, value_enum, default_value = "full")]
    pub constraint: ConstraintKind,
    /// Reference direction of the hemisphere constraint.
    #[arg(long = "ref", value_delimiter = ',', allow_hyphen_values = true)]
    pub reference: Option<Vec<f64>>,
    /// Component `l` (1-based) of the constraint `|b_l| ≥ bound`.
    #[arg(long)]
    pub component: Option<usize>,
    #[arg(long)]
    pub bound: Option<f64>,
    /// Direction whose hemisphere chart gives `θ̂`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta_ref: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub estimator: EstimatorArgs,
    #[arg(long, default_value = "exponential")]
    pub weights: WeightDistribution,
    /// Bootstrap replications `B`.
    #[arg(long, short = 'B', default_value_t = 500)]
    pub replications: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.9, 0.95])]
    pub levels: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// CSV of the bootstrap draws `θ̂*_b`.
    #[arg(long)]
    pub draws: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Report directory (overrides `output` in the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Mc,
}

#[derive(Debug, Args)]
pub struct HoeffdingArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[arg(long, value_enum, default_value = "x1")]
    pub function: FunctionChoice,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: ModeArg,
    /// Monte Carlo draws per projection.
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    /// Monte Carlo draws for the population mean.
    #[arg(long, default_value_t = maxscore_core::hoeffding::DEFAULT_EF_DRAWS)]
    pub ef_draws: usize,
    /// Flat CSV table of the projections.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub dgp: DgpVariant,
    /// Limits `λ_k = lim n/N_k`.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.0])]
    pub lambda: Vec<f64>,
    #[arg(long, default_value_t = maxscore_core::oracle::DEFAULT_U_DRAWS)]
    pub u_draws: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1024)]
    pub nodes: usize,
    #[arg(long, default_value_t = 8.0)]
    pub radius: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}
