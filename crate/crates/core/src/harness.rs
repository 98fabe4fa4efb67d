//! Monte Carlo studies on square `n × n` grids: convergence rate,
//! Gaussianity of `√n·θ̂`, and bootstrap coverage.
//!
//! Replication `r` at size `n` simulates with seed
//! `derive_seed(seed, [n, r])`; replications run in parallel and are
//! reduced in index order, so reports do not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrays::{derive_seed, materialize, open_unit, MultiIndexGrid};
use crate::bootstrap::{bootstrap_estimate, BootstrapConfig, WeightDistribution, WeightSpec};
use crate::dgp::{DgpSpec, DgpVariant};
use crate::error::{Error, Result};
use crate::geometry::{basis_complement, Direction};
use crate::score::{ConstraintSet, Optimizer};
use crate::stats::{
    ks_p_value, ks_statistic, ks_two_sample, mean, normal_cdf, normal_quantile, ols_line,
    std_dev, LineFit,
};

/// Smallest replication count accepted by the studies.
pub const MIN_REPLICATIONS: usize = 50;
/// Smallest replication count for a normality study.
pub const MIN_NORMALITY_REPLICATIONS: usize = 300;
/// Smallest replication count for a coverage study.
pub const MIN_COVERAGE_REPLICATIONS: usize = 200;

const COVERAGE_BOOT_TAG: u64 = 0xC0_7E4A_6E;
const KS_RESAMPLE_TAG: u64 = 0x5E_5A3F_1E;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSettings {
    pub distribution: WeightDistribution,
    pub replications: usize,
    pub levels: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dgp: DgpVariant,
    /// Square grid sizes `n` (`N₁ = N₂ = n`).
    pub sizes: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
    pub bootstrap: Option<BootstrapSettings>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dgp == DgpVariant::DiscreteTest {
            return Err(Error::InvalidArgument(
                "studies need a continuous design".into(),
            ));
        }
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::InvalidArgument(format!(
                "need at least {MIN_REPLICATIONS} replications, got {}",
                self.replications
            )));
        }
        if self.sizes.is_empty() || self.sizes.iter().any(|&n| n < 2) {
            return Err(Error::InvalidArgument("grid sizes must be at least 2".into()));
        }
        if let Some(b) = &self.bootstrap {
            WeightSpec {
                distribution: b.distribution,
                replications: b.replications,
            }
            .validate()?;
            if let Some(&l) = b.levels.iter().find(|&&l| !(l > 0.0 && l < 1.0)) {
                return Err(Error::InvalidArgument(format!("level {l} outside (0, 1)")));
            }
        }
        Ok(())
    }

    fn require_single_size(&self, study: &str, min_replications: usize) -> Result<usize> {
        if self.sizes.len() != 1 {
            return Err(Error::InvalidArgument(format!(
                "a {study} study takes exactly one grid size"
            )));
        }
        if self.replications < min_replications {
            return Err(Error::InvalidArgument(format!(
                "a {study} study needs at least {min_replications} replications, got {}",
                self.replications
            )));
        }
        Ok(self.sizes[0])
    }

    fn spec(&self) -> DgpSpec {
        DgpSpec::new(self.dgp)
    }
}

/// `θ̂` and the angular error of `β̂` from one replication.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Replication {
    pub index: usize,
    pub theta: Vec<f64>,
    pub angle: f64,
}

fn simulate_estimate(
    spec: &DgpSpec,
    optimizer: Optimizer,
    n: usize,
    seed: u64,
    r: usize,
) -> Result<(crate::dataset::Dataset, crate::score::DirectionEstimate)> {
    let grid = MultiIndexGrid::square(spec.k_dims, n)?;
    let data = materialize(spec, &grid, derive_seed(seed, &[n as u64, r as u64]))?;
    let basis = basis_complement(&Direction::new(spec.beta0.clone())?)?;
    let est = optimizer
        .estimate(&data, &ConstraintSet::FullSphere, None)?
        .with_reference(&basis)?;
    Ok((data, est))
}

/// Angle between `β̂` reflected into the hemisphere of `β₀` and `β₀`.
fn angular_error(beta0: &[f64], beta: &Direction) -> f64 {
    beta.dot(beta0).abs().min(1.0).acos()
}

/// Runs `count` replications at size `n`, dropping failures; aborts when
/// more than 1% fail.
fn replicate<T: Send>(
    n: usize,
    count: usize,
    run: impl Fn(usize) -> Result<T> + Sync,
) -> Result<(Vec<T>, Vec<usize>)> {
    let outcomes: Vec<Result<T>> = (0..count).into_par_iter().map(&run).collect();
    let mut ok = Vec::with_capacity(count);
    let mut failed = Vec::new();
    let mut first_message = None;
    for (r, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(v) => ok.push(v),
            Err(e) => {
                log::warn!("replication {r} at n = {n} failed: {e}");
                first_message.get_or_insert_with(|| e.to_string());
                failed.push(r);
            }
        }
    }
    if failed.len() * 100 > count {
        return Err(Error::TooManyFailures {
            n,
            failed: failed.len(),
            total: count,
            first: failed[0],
            message: first_message.unwrap_or_default(),
        });
    }
    Ok((ok, failed))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub replications: usize,
    pub failed: usize,
    pub rmse_theta: f64,
    pub rmse_theta_se: f64,
    pub rmse_angle: f64,
    /// Standard deviation of `√n·θ̂` (first coordinate).
    pub sd_scaled_theta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub dgp: DgpVariant,
    pub rows: Vec<RateRow>,
    /// Fit of `log RMSE` on `log n`.
    pub fit: LineFit,
    /// Fit of `log RMSE` on `log |I_N| = 2 log n`.
    pub fit_cells: LineFit,
}

/// RMSE of `θ̂` per grid size and its log-log regression on `n`.
pub fn run_rate_study(config: &ExperimentConfig) -> Result<RateReport> {
    config.validate()?;
    if config.sizes.len() < 3 {
        return Err(Error::InvalidArgument(
            "a rate study needs at least three grid sizes".into(),
        ));
    }
    let spec = config.spec();
    let mut rows = Vec::with_capacity(config.sizes.len());
    for &n in &config.sizes {
        let (reps, failed) = replicate(n, config.replications, |r| {
            let (_, est) = simulate_estimate(&spec, config.optimizer, n, config.seed, r)?;
            Ok(Replication {
                index: r,
                theta: est.theta_hat.expect("reference supplied").into(),
                angle: angular_error(&spec.beta0, &est.beta_hat),
            })
        })?;
        rows.push(rate_row(n, &reps, failed.len()));
    }
    let x: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.rmse_theta.ln()).collect();
    let fit = ols_line(&x, &y)?;
    let x_cells: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    let fit_cells = ols_line(&x_cells, &y)?;
    Ok(RateReport {
        dgp: config.dgp,
        rows,
        fit,
        fit_cells,
    })
}

fn rate_row(n: usize, reps: &[Replication], failed: usize) -> RateRow {
    let sq: Vec<f64> = reps
        .iter()
        .map(|r| r.theta.iter().map(|t| t * t).sum())
        .collect();
    let mse = mean(&sq);
    let rmse = mse.sqrt();
    let mse_se = std_dev(&sq) / (sq.len() as f64).sqrt();
    let angles: Vec<f64> = reps.iter().map(|r| r.angle * r.angle).collect();
    let scaled: Vec<f64> = reps
        .iter()
        .map(|r| (n as f64).sqrt() * r.theta[0])
        .collect();
    RateRow {
        n,
        replications: reps.len(),
        failed,
        rmse_theta: rmse,
        rmse_theta_se: if rmse > 0.0 { mse_se / (2.0 * rmse) } else { 0.0 },
        rmse_angle: mean(&angles).sqrt(),
        sd_scaled_theta: std_dev(&scaled),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QqPoint {
    pub theoretical: f64,
    pub sample: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub dgp: DgpVariant,
    pub n: usize,
    pub replications: usize,
    pub failed: usize,
    /// `√n·θ̂` per replication (first coordinate), in replication order.
    pub scaled_draws: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    /// Set when the sample standard deviation is zero.
    pub degenerate: bool,
    pub ks_statistic: Option<f64>,
    pub ks_p_value: Option<f64>,
    pub qq: Vec<QqPoint>,
}

/// `√n·θ̂` at a single size, standardized by its own standard deviation
/// and tested against the standard normal.
pub fn run_normality_study(config: &ExperimentConfig) -> Result<NormalityReport> {
    config.validate()?;
    let n = config.require_single_size("normality", MIN_NORMALITY_REPLICATIONS)?;
    let spec = config.spec();
    let (reps, failed) = replicate(n, config.replications, |r| {
        let (_, est) = simulate_estimate(&spec, config.optimizer, n, config.seed, r)?;
        let theta: Vec<f64> = est.theta_hat.expect("reference supplied").into();
        Ok((n as f64).sqrt() * theta[0])
    })?;
    Ok(normality_from_draws(config.dgp, n, reps, failed.len()))
}

/// Normality diagnostics of `draws` under `N(0, s²)` with `s` the sample
/// standard deviation.
pub fn normality_from_draws(
    dgp: DgpVariant,
    n: usize,
    draws: Vec<f64>,
    failed: usize,
) -> NormalityReport {
    let m = mean(&draws);
    let sd = std_dev(&draws);
    let degenerate = !(sd > 0.0);
    let (ks, p, qq) = if degenerate {
        (None, None, Vec::new())
    } else {
        let z: Vec<f64> = draws.iter().map(|d| d / sd).collect();
        let d = ks_statistic(&z, normal_cdf);
        let mut sorted = z.clone();
        sorted.sort_by(f64::total_cmp);
        let count = sorted.len() as f64;
        let qq = sorted
            .iter()
            .enumerate()
            .map(|(i, &s)| QqPoint {
                theoretical: normal_quantile((i as f64 + 0.5) / count),
                sample: s,
            })
            .collect();
        (Some(d), Some(ks_p_value(z.len(), d)), qq)
    };
    NormalityReport {
        dgp,
        n,
        replications: draws.len(),
        failed,
        scaled_draws: draws,
        mean: m,
        sd,
        degenerate,
        ks_statistic: ks,
        ks_p_value: p,
        qq,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub level: f64,
    pub coverage: f64,
    pub coverage_se: f64,
    pub mean_length: f64,
    pub symmetric_coverage: f64,
    pub symmetric_mean_length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub dgp: DgpVariant,
    pub n: usize,
    pub replications: usize,
    pub failed: usize,
    pub bootstrap: BootstrapSettings,
    /// Percentile-interval rows, one per level.
    pub rows: Vec<CoverageRow>,
    /// KS distance between `{√n θ̂_r}` and pooled `{√n(θ̂*_{r,b} − θ̂_r)}`.
    pub ks_distance: f64,
    /// Standard error of the distance from resampling replications.
    pub ks_distance_se: f64,
}

struct CoverageReplication {
    theta: f64,
    deviations: Vec<f64>,
    percentile: Vec<(f64, f64)>,
    symmetric: Vec<(f64, f64)>,
}

/// Bootstrap interval coverage of `θ₀ = 0` at a single size.
pub fn run_coverage_study(config: &ExperimentConfig) -> Result<CoverageReport> {
    config.validate()?;
    let settings = config.bootstrap.clone().ok_or_else(|| {
        Error::InvalidArgument("a coverage study needs bootstrap settings".into())
    })?;
    let n = config.require_single_size("coverage", MIN_COVERAGE_REPLICATIONS)?;
    let spec = config.spec();
    let beta0 = Direction::new(spec.beta0.clone())?;
    let sqrt_n = (n as f64).sqrt();
    let (reps, failed) = replicate(n, config.replications, |r| {
        let grid = MultiIndexGrid::square(spec.k_dims, n)?;
        let data = materialize(&spec, &grid, derive_seed(config.seed, &[n as u64, r as u64]))?;
        let boot = BootstrapConfig {
            weights: WeightSpec {
                distribution: settings.distribution,
                replications: settings.replications,
            },
            optimizer: config.optimizer,
            constraint: ConstraintSet::FullSphere,
            reference: Some(beta0.clone()),
            levels: settings.levels.clone(),
            seed: derive_seed(config.seed, &[COVERAGE_BOOT_TAG, n as u64, r as u64]),
        };
        let report = bootstrap_estimate(&data, &boot)?;
        let th = report.theta_hat[0];
        let pick = |set: &[crate::bootstrap::Interval]| -> Vec<(f64, f64)> {
            set.iter()
                .filter(|i| i.coordinate == 0)
                .map(|i| (i.lower, i.upper))
                .collect()
        };
        Ok(CoverageReplication {
            theta: th,
            deviations: report.theta_star.iter().map(|t| sqrt_n * (t[0] - th)).collect(),
            percentile: pick(&report.intervals.percentile),
            symmetric: pick(&report.intervals.symmetric),
        })
    })?;

    let count = reps.len() as f64;
    let rows = settings
        .levels
        .iter()
        .enumerate()
        .map(|(j, &level)| {
            let hit = |iv: (f64, f64)| iv.0 <= 0.0 && 0.0 <= iv.1;
            let cov = reps.iter().filter(|r| hit(r.percentile[j])).count() as f64 / count;
            let sym = reps.iter().filter(|r| hit(r.symmetric[j])).count() as f64 / count;
            CoverageRow {
                level,
                coverage: cov,
                coverage_se: (cov * (1.0 - cov) / count).sqrt(),
                mean_length: reps.iter().map(|r| r.percentile[j].1 - r.percentile[j].0).sum::<f64>()
                    / count,
                symmetric_coverage: sym,
                symmetric_mean_length: reps
                    .iter()
                    .map(|r| r.symmetric[j].1 - r.symmetric[j].0)
                    .sum::<f64>()
                    / count,
            }
        })
        .collect();

    let mc: Vec<f64> = reps.iter().map(|r| sqrt_n * r.theta).collect();
    let pooled: Vec<f64> = reps.iter().flat_map(|r| r.deviations.iter().copied()).collect();
    let ks_distance = ks_two_sample(&mc, &pooled);
    let ks_distance_se = resampled_ks_se(&reps, sqrt_n, config.seed, 200);
    Ok(CoverageReport {
        dgp: config.dgp,
        n,
        replications: reps.len(),
        failed: failed.len(),
        bootstrap: settings,
        rows,
        ks_distance,
        ks_distance_se,
    })
}

/// Standard deviation of the KS distance over resamples of replications.
fn resampled_ks_se(reps: &[CoverageReplication], sqrt_n: f64, seed: u64, resamples: usize) -> f64 {
    let m = reps.len();
    let distances: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|s| {
            let picks: Vec<usize> = (0..m)
                .map(|j| {
                    let h = derive_seed(seed, &[KS_RESAMPLE_TAG, s as u64, j as u64]);
                    ((open_unit(h) * m as f64) as usize).min(m - 1)
                })
                .collect();
            let mc: Vec<f64> = picks.iter().map(|&p| sqrt_n * reps[p].theta).collect();
            let pooled: Vec<f64> = picks
                .iter()
                .flat_map(|&p| reps[p].deviations.iter().copied())
                .collect();
            ks_two_sample(&mc, &pooled)
        })
        .collect();
    std_dev(&distances)
}
