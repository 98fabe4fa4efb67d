//! Report envelopes. Each report carries the resolved configuration it was
//! produced from and parses back into the same types.

use std::path::PathBuf;

use maxscore_core::hoeffding::DecompositionMode;
use maxscore_core::oracle::OracleValue;
use maxscore_core::{
    AsymptoticOracle, BootstrapReport, ConstraintSet, CoverageReport, DgpSpec, Direction,
    DirectionEstimate, NormalityReport, Optimizer, ProjectionTable, Quadrature, RateReport,
    WeightSpec,
};
use serde::{Deserialize, Serialize};

use crate::config::MonteCarloConfig;
use crate::data::{LoadOptions, LoadSummary};
use crate::hoeffding_cmd::FunctionChoice;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report<C, R> {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: C,
    pub result: R,
}

impl<C, R> Report<C, R> {
    pub fn new(command: &str, seed: Option<u64>, config: C, result: R) -> Self {
        Self {
            command: command.to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            seed,
            config,
            result,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub dgp: DgpSpec,
    pub grid: Vec<usize>,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub data: PathBuf,
    pub load: LoadOptions,
    pub method: Optimizer,
    pub constraint: ConstraintSet,
    pub theta_reference: Option<Direction>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub dataset: LoadSummary,
    pub estimate: DirectionEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapRunConfig {
    pub estimation: EstimateConfig,
    pub weights: WeightSpec,
    pub levels: Vec<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub dataset: LoadSummary,
    pub bootstrap: BootstrapReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoeffdingConfig {
    pub dgp: DgpSpec,
    pub grid: Vec<usize>,
    pub seed: u64,
    pub function: FunctionChoice,
    pub mode: DecompositionMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub dgp: DgpSpec,
    pub lambda: Vec<f64>,
    pub u_draws: usize,
    pub seed: u64,
    pub quadrature: Quadrature,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub hessian: OracleValue,
    /// Absent for designs without a variance oracle.
    pub variance: Option<AsymptoticOracle>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "study", rename_all = "kebab-case")]
pub enum StudyResult {
    Rate(RateReport),
    Normality(NormalityReport),
    Coverage(CoverageReport),
}

pub type SimulateReport = Report<SimulateConfig, LoadSummary>;
pub type EstimateReport = Report<EstimateConfig, EstimateResult>;
pub type BootstrapCliReport = Report<BootstrapRunConfig, BootstrapResult>;
pub type HoeffdingReport = Report<HoeffdingConfig, ProjectionTable>;
pub type OracleReport = Report<OracleConfig, OracleResult>;
pub type MonteCarloReport = Report<MonteCarloConfig, StudyResult>;
