//! TOML configuration of `montecarlo` runs.
//!
//! ```toml
//! study = "rate"
//! dgp = "add-shock"
//! sizes = [25, 50, 100, 200]
//! replications = 300
//! seed = 1
//!
//! [bootstrap]            # coverage studies only
//! distribution = "exponential"
//! replications = 200
//! levels = [0.9, 0.95]
//! ```

use std::path::{Path, PathBuf};

use maxscore_core::{BootstrapSettings, DgpVariant, ExperimentConfig, Optimizer, WeightDistribution};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    Rate,
    Normality,
    Coverage,
}

fn default_replications() -> usize {
    300
}

fn default_seed() -> u64 {
    1
}

fn default_distribution() -> WeightDistribution {
    WeightDistribution::Exponential
}

fn default_boot_replications() -> usize {
    200
}

fn default_levels() -> Vec<f64> {
    vec![0.9, 0.95]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapToml {
    #[serde(default = "default_distribution")]
    pub distribution: WeightDistribution,
    #[serde(default = "default_boot_replications")]
    pub replications: usize,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
}

/// Resolved run configuration; every field is written back into the
/// report with its default filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub study: Study,
    pub dgp: DgpVariant,
    pub sizes: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub optimizer: Optimizer,
    #[serde(default)]
    pub bootstrap: Option<BootstrapToml>,
    /// Report directory; `--out` takes precedence.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl MonteCarloConfig {
    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            dgp: self.dgp,
            sizes: self.sizes.clone(),
            replications: self.replications,
            seed: self.seed,
            optimizer: self.optimizer,
            bootstrap: self.bootstrap.as_ref().map(|b| BootstrapSettings {
                distribution: b.distribution,
                replications: b.replications,
                levels: b.levels.clone(),
            }),
        }
    }
}
