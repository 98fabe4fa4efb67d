//! Product-multiplier bootstrap: per-dimension i.i.d. weights `ξ^k_{i_k}`
//! with unit mean and variance, cell weight `ξ_i = ∏_k ξ^k_{i_k}`, and
//! re-maximization of the weighted score.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrays::{derive_seed, LatentStore, MultiIndexGrid, Pattern};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::{basis_complement, reflect_to_hemisphere, theta_of_beta, Direction};
use crate::score::{ConstraintSet, DirectionEstimate, Optimizer};
use crate::stats::quantile_type1;

const WEIGHT_SEED_TAG: u64 = 0xB0_0757_4A9;
const WEIGHT_CHANNEL: &str = "xi";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightDistribution {
    /// Exponential(1).
    Exponential,
    /// Poisson(1).
    Poisson,
    /// Every weight equal to 1; the bootstrap then reproduces the estimate.
    Ones,
}

impl WeightDistribution {
    pub fn name(self) -> &'static str {
        match self {
            WeightDistribution::Exponential => "exponential",
            WeightDistribution::Poisson => "poisson",
            WeightDistribution::Ones => "ones",
        }
    }

    /// Inverse distribution function.
    pub fn quantile(self, u: f64) -> f64 {
        match self {
            WeightDistribution::Exponential => -(1.0 - u).ln(),
            WeightDistribution::Poisson => {
                let mut k = 0u32;
                let mut p = (-1.0f64).exp();
                let mut cdf = p;
                while u > cdf && k < 64 {
                    k += 1;
                    p /= f64::from(k);
                    cdf += p;
                }
                f64::from(k)
            }
            WeightDistribution::Ones => 1.0,
        }
    }
}

impl fmt::Display for WeightDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            WeightDistribution::Exponential,
            WeightDistribution::Poisson,
            WeightDistribution::Ones,
        ]
        .into_iter()
        .find(|d| d.name() == s)
        .ok_or_else(|| Error::UnknownVariant {
            kind: "weight distribution",
            value: s.to_owned(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub distribution: WeightDistribution,
    /// Bootstrap replications `B`.
    pub replications: usize,
}

impl WeightSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidArgument("need at least one bootstrap replication".into()));
        }
        Ok(())
    }
}

fn weight_store(seed: u64, replicate: usize) -> LatentStore {
    LatentStore::new(derive_seed(seed, &[WEIGHT_SEED_TAG, replicate as u64]))
}

/// `ξ^k_1, …, ξ^k_{N_k}` for dimension `k` (0-based) of replicate `b`.
pub fn draw_dimension_weights(
    dist: WeightDistribution,
    grid: &MultiIndexGrid,
    seed: u64,
    replicate: usize,
    k: usize,
) -> Vec<f64> {
    let store = weight_store(seed, replicate);
    let kd = grid.k_dims();
    let pattern = Pattern::unit(k, kd);
    let mut idx = vec![0u32; kd];
    (1..=grid.sizes()[k] as u32)
        .map(|i| {
            idx[k] = i;
            dist.quantile(store.uniform(pattern, &idx, WEIGHT_CHANNEL))
        })
        .collect()
}

/// Cell weights `ξ_i` of replicate `b` for every cell of `grid`, in
/// lexicographic cell order. Depends on indices only, never on data.
pub fn draw_weights(spec: &WeightSpec, grid: &MultiIndexGrid, seed: u64, replicate: usize) -> Vec<f64> {
    let factors = dimension_factors(spec.distribution, grid, seed, replicate);
    grid.cells().map(|idx| cell_weight(&factors, &idx)).collect()
}

fn dimension_factors(
    dist: WeightDistribution,
    grid: &MultiIndexGrid,
    seed: u64,
    replicate: usize,
) -> Vec<Vec<f64>> {
    (0..grid.k_dims())
        .map(|k| draw_dimension_weights(dist, grid, seed, replicate, k))
        .collect()
}

fn cell_weight(factors: &[Vec<f64>], idx: &[u32]) -> f64 {
    factors
        .iter()
        .zip(idx)
        .map(|(f, &i)| f[i as usize - 1])
        .product()
}

/// Cell weights of replicate `b` for the records of `data`.
pub fn record_weights(data: &Dataset, spec: &WeightSpec, seed: u64, replicate: usize) -> Vec<f64> {
    let factors = dimension_factors(spec.distribution, data.grid(), seed, replicate);
    (0..data.len())
        .map(|i| cell_weight(&factors, data.index(i)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub level: f64,
    /// Zero-based coordinate of `θ`.
    pub coordinate: usize,
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    pub percentile: Vec<Interval>,
    pub symmetric: Vec<Interval>,
}

/// Percentile intervals `[θ̂ − q_{1−α/2}, θ̂ − q_{α/2}]` and symmetric
/// intervals `θ̂ ± q_{1−α}(|θ̂* − θ̂|)`, with left-continuous empirical
/// quantiles.
pub fn confidence_intervals(
    theta_hat: &[f64],
    theta_star: &[Vec<f64>],
    levels: &[f64],
) -> Result<IntervalSet> {
    if theta_star.is_empty() {
        return Err(Error::InvalidArgument("no bootstrap draws".into()));
    }
    if let Some(&l) = levels.iter().find(|&&l| !(l > 0.0 && l < 1.0)) {
        return Err(Error::InvalidArgument(format!("level {l} outside (0, 1)")));
    }
    if let Some(t) = theta_star.iter().find(|t| t.len() != theta_hat.len()) {
        return Err(Error::DimensionMismatch {
            expected: theta_hat.len(),
            found: t.len(),
        });
    }
    let mut percentile = Vec::new();
    let mut symmetric = Vec::new();
    for (c, &th) in theta_hat.iter().enumerate() {
        let mut dev: Vec<f64> = theta_star.iter().map(|t| t[c] - th).collect();
        dev.sort_by(f64::total_cmp);
        let mut abs: Vec<f64> = dev.iter().map(|v| v.abs()).collect();
        abs.sort_by(f64::total_cmp);
        for &level in levels {
            let alpha = 1.0 - level;
            percentile.push(Interval {
                level,
                coordinate: c,
                lower: th - quantile_type1(&dev, 1.0 - alpha / 2.0),
                upper: th - quantile_type1(&dev, alpha / 2.0),
            });
            let q = quantile_type1(&abs, level);
            symmetric.push(Interval {
                level,
                coordinate: c,
                lower: th - q,
                upper: th + q,
            });
        }
    }
    Ok(IntervalSet {
        percentile,
        symmetric,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub weights: WeightSpec,
    pub optimizer: Optimizer,
    pub constraint: ConstraintSet,
    /// Direction defining `θ`; `None` uses the full-sample estimate.
    pub reference: Option<Direction>,
    pub levels: Vec<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSummary {
    pub distribution: WeightDistribution,
    pub replications: usize,
    pub seed: u64,
    /// Average record weight over all replicates.
    pub mean_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapReport {
    pub estimate: DirectionEstimate,
    pub reference: Direction,
    pub theta_hat: Vec<f64>,
    /// `B` rows of `θ̂*`.
    pub theta_star: Vec<Vec<f64>>,
    pub beta_star: Vec<Direction>,
    /// Scale `n = min_k N_k` in `√n(θ̂* − θ̂)`.
    pub rate_n: usize,
    /// Sample covariance of `√n(θ̂* − θ̂)`.
    pub variance_hat: Vec<Vec<f64>>,
    pub intervals: IntervalSet,
    pub weights: WeightSummary,
}

/// Runs `B` weighted re-estimations of `data`.
pub fn bootstrap_estimate(data: &Dataset, config: &BootstrapConfig) -> Result<BootstrapReport> {
    config.weights.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let prepared = config.optimizer.prepare(data, &config.constraint)?;
    let estimate = prepared.solve(None)?;
    let reference = match &config.reference {
        Some(r) => r.clone(),
        None => estimate.beta_hat.clone(),
    };
    let basis = basis_complement(&reference)?;
    let estimate = estimate.with_reference(&basis)?;
    let theta_hat: Vec<f64> = estimate
        .theta_hat
        .clone()
        .expect("reference supplied")
        .into();

    let b_count = config.weights.replications;
    if b_count < 20 {
        log::warn!("only {b_count} bootstrap replications; intervals will be unstable");
    }
    let results: Vec<Result<(Direction, Vec<f64>, f64)>> = (0..b_count)
        .into_par_iter()
        .map(|b| {
            let w = record_weights(data, &config.weights, config.seed, b);
            let est = prepared.solve(Some(&w)).map_err(|e| Error::Replicate {
                index: b,
                source: Box::new(e),
            })?;
            let (beta, _) = reflect_to_hemisphere(&basis, &est.beta_hat);
            let theta: Vec<f64> = theta_of_beta(&basis, &beta)?.into();
            let mean_w = w.iter().sum::<f64>() / w.len() as f64;
            Ok((beta, theta, mean_w))
        })
        .collect();
    let mut theta_star = Vec::with_capacity(b_count);
    let mut beta_star = Vec::with_capacity(b_count);
    let mut weight_sum = 0.0;
    for r in results {
        let (beta, theta, mw) = r?;
        beta_star.push(beta);
        theta_star.push(theta);
        weight_sum += mw;
    }

    let rate_n = data.grid().n();
    let variance_hat = scaled_covariance(&theta_hat, &theta_star, rate_n as f64);
    let intervals = confidence_intervals(&theta_hat, &theta_star, &config.levels)?;
    Ok(BootstrapReport {
        estimate,
        reference,
        theta_hat,
        theta_star,
        beta_star,
        rate_n,
        variance_hat,
        intervals,
        weights: WeightSummary {
            distribution: config.weights.distribution,
            replications: b_count,
            seed: config.seed,
            mean_weight: weight_sum / b_count as f64,
        },
    })
}

/// Covariance of `√n(θ̂*_b − θ̂)` around its own mean.
fn scaled_covariance(theta_hat: &[f64], theta_star: &[Vec<f64>], n: f64) -> Vec<Vec<f64>> {
    let p = theta_hat.len();
    let b = theta_star.len();
    let scaled: Vec<Vec<f64>> = theta_star
        .iter()
        .map(|t| t.iter().zip(theta_hat).map(|(s, h)| n.sqrt() * (s - h)).collect())
        .collect();
    let means: Vec<f64> = (0..p)
        .map(|c| scaled.iter().map(|s| s[c]).sum::<f64>() / b as f64)
        .collect();
    let denom = if b > 1 { (b - 1) as f64 } else { 1.0 };
    (0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    scaled
                        .iter()
                        .map(|s| (s[i] - means[i]) * (s[j] - means[j]))
                        .sum::<f64>()
                        / denom
                })
                .collect()
        })
        .collect()
}
