//! Numerical asymptotic objects of the shipped `d = 2`, `K = 2` designs:
//! the influence terms `Δ_k(u)`, the Hessian `H`, `Ω = Σ_k λ_k E[Δ_k Δ_k']`
//! and `V = H⁻¹ΩH⁻¹`.
//!
//! For `d = 2` the boundary `∂A₀ = {x : x'β₀ = 0}` is the line `t·v` with
//! `v` the single column of `B₀`, so the surface integrals are
//! one-dimensional. In every shipped design the conditional median
//! function `m` depends on `x` only through the index `x'β₀`, hence is
//! constant along the boundary and only the covariate density is
//! integrated over `t`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrays::{CellLatents, LatentStore, Pattern};
use crate::dgp::{DgpSpec, DgpVariant, CHANNEL_EPS, CHANNEL_SCALE};
use crate::error::{Error, Result};
use crate::geometry::{basis_complement, dot, Direction};
use crate::stats::{mean, normal_cdf, normal_pdf, normal_quantile, variance};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    /// Trapezoid nodes per integral.
    pub nodes: usize,
    /// Truncation radius in standard deviations.
    pub radius: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            nodes: 1024,
            radius: 8.0,
        }
    }
}

impl Quadrature {
    fn validate(&self) -> Result<()> {
        if self.nodes < 16 {
            return Err(Error::InvalidArgument(format!(
                "quadrature needs at least 16 nodes, got {}",
                self.nodes
            )));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidArgument("truncation radius must be positive".into()));
        }
        Ok(())
    }

    fn halved(self) -> Self {
        Self {
            nodes: self.nodes / 2,
            ..self
        }
    }
}

/// Quadrature value with the change observed when halving the node count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    pub refinement_error: f64,
}

/// Composite trapezoid rule with `nodes` equally spaced points on `[lo, hi]`.
pub fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, nodes: usize) -> f64 {
    assert!(nodes >= 2);
    let h = (hi - lo) / (nodes - 1) as f64;
    let mut sum = 0.5 * (f(lo) + f(hi));
    for j in 1..nodes - 1 {
        sum += f(lo + j as f64 * h);
    }
    sum * h
}

/// Standard normal expectation `E[g(Z)]` by truncated trapezoid.
fn normal_expectation(g: impl Fn(f64) -> f64, quad: Quadrature) -> f64 {
    let r = quad.radius;
    trapezoid(|z| g(z) * normal_pdf(z), -r, r, quad.nodes)
}

/// Standard-normal shocks of one clustering level (a row or a column).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelShocks {
    /// Covariate shocks `z(U_{e_k}, x_l)`.
    pub x: Vec<f64>,
    /// Error shock `z(U_{e_k}, e)` (used by the additive design).
    pub e: f64,
    /// Scale shock `z(U_{e_k}, s)` (used by the multiplicative design).
    pub s: f64,
}

impl LevelShocks {
    /// Reads the level-`k` shocks from the latents of a cell.
    pub fn from_cell(latents: &impl CellLatents, k: usize, d: usize) -> Self {
        let p = Pattern::unit(k, latents.k_dims());
        let z = |ch: &str| normal_quantile(latents.uniform(p, ch));
        Self {
            x: (1..=d).map(|l| z(&format!("x{l}"))).collect(),
            e: z(CHANNEL_EPS),
            s: z(CHANNEL_SCALE),
        }
    }
}

/// Boundary direction `v` (the column of `B₀`) and `β₀`.
fn boundary_frame(spec: &DgpSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let beta0 = Direction::new(spec.beta0.clone())?;
    let basis = basis_complement(&beta0)?;
    Ok((basis.columns()[0].clone(), spec.beta0.clone()))
}

fn check_supported(spec: &DgpSpec, allowed: &[DgpVariant]) -> Result<()> {
    spec.validate()?;
    if spec.d != 2 || spec.k_dims != 2 {
        return Err(Error::Unsupported(format!(
            "oracles need d = 2 and K = 2, got d = {} and K = {}",
            spec.d, spec.k_dims
        )));
    }
    if !allowed.contains(&spec.variant) {
        return Err(Error::Unsupported(format!(
            "no oracle for the {} design here",
            spec.variant
        )));
    }
    Ok(())
}

/// Scale `s = 1 + ½z_row² + ½z_col²` of the multiplicative design.
fn scale(z1: f64, z2: f64) -> f64 {
    1.0 + 0.5 * z1 * z1 + 0.5 * z2 * z2
}

/// `m_{0,e_k}` at index `x'β₀ = c` given the level shocks.
fn conditional_median_fn(spec: &DgpSpec, c: f64, u: &LevelShocks, quad: Quadrature) -> f64 {
    match spec.variant {
        // ε | level = α + N(0, 2).
        DgpVariant::AddShock => 2.0 * normal_cdf((c - u.e) / 2f64.sqrt()) - 1.0,
        // ε | level = s·Z with s driven by this level's and the other
        // level's scale shock; average over the latter.
        DgpVariant::MultScale => {
            normal_expectation(|z| 2.0 * normal_cdf(c / scale(u.s, z)) - 1.0, quad)
        }
        _ => unreachable!("checked by caller"),
    }
}

/// `∫ p(tv | u)·t dt` with `X | level ~ N(a, 2I)`.
fn first_moment_on_boundary(v: &[f64], a: &[f64], quad: Quadrature) -> f64 {
    let var: f64 = 2.0;
    let sd = var.sqrt();
    let centre = dot(v, a);
    let dens = |t: f64| {
        let r2: f64 = v.iter().zip(a).map(|(vi, ai)| (t * vi - ai).powi(2)).sum();
        (-0.5 * r2 / var).exp() / (2.0 * std::f64::consts::PI * var)
    };
    let r = quad.radius * sd;
    trapezoid(|t| dens(t) * t, centre - r, centre + r, quad.nodes)
}

fn delta_at(spec: &DgpSpec, u: &LevelShocks, quad: Quadrature) -> Result<f64> {
    let (v, _) = boundary_frame(spec)?;
    let m = conditional_median_fn(spec, 0.0, u, quad);
    // x'B₀ = t·(v'B₀) = t on the boundary line.
    Ok(m * first_moment_on_boundary(&v, &u.x, quad))
}

/// `Δ_k(u)` for a level-`k` shock draw (0-based `k`).
pub fn oracle_delta(
    spec: &DgpSpec,
    k: usize,
    u: &LevelShocks,
    quad: Quadrature,
) -> Result<OracleValue> {
    check_supported(spec, &[DgpVariant::MultScale, DgpVariant::AddShock])?;
    quad.validate()?;
    if k >= spec.k_dims {
        return Err(Error::InvalidArgument(format!("level {} out of range", k + 1)));
    }
    if u.x.len() != spec.d {
        return Err(Error::DimensionMismatch {
            expected: spec.d,
            found: u.x.len(),
        });
    }
    // The two levels enter the shipped designs symmetrically.
    let value = delta_at(spec, u, quad)?;
    let coarse = delta_at(spec, u, quad.halved())?;
    Ok(OracleValue {
        value,
        refinement_error: (value - coarse).abs(),
    })
}

fn hessian_at(spec: &DgpSpec, quad: Quadrature) -> Result<f64> {
    let (v, _) = boundary_frame(spec)?;
    // Unconditional covariate variance per component and the slope of m₀
    // along β₀ on the boundary.
    let (var_x, slope): (f64, f64) = match spec.variant {
        DgpVariant::AddShock => (3.0, 2.0 * normal_pdf(0.0) / 3f64.sqrt()),
        DgpVariant::Iid => (1.0, 2.0 * normal_pdf(0.0)),
        DgpVariant::MultScale => {
            let r = quad.radius;
            let inner = |z1: f64| {
                normal_expectation(|z2| 2.0 * normal_pdf(0.0) / scale(z1, z2), quad)
            };
            (3.0, trapezoid(|z1| inner(z1) * normal_pdf(z1), -r, r, quad.nodes))
        }
        DgpVariant::DiscreteTest => unreachable!("checked by caller"),
    };
    let sd = var_x.sqrt();
    let dens = |t: f64| {
        let r2: f64 = v.iter().map(|vi| (t * vi).powi(2)).sum();
        (-0.5 * r2 / var_x).exp() / (2.0 * std::f64::consts::PI * var_x)
    };
    let r = quad.radius * sd;
    Ok(slope * trapezoid(|t| dens(t) * t * t, -r, r, quad.nodes))
}

/// The scalar Hessian `H = ∫ (ṁ₀(x)'β₀)(x'B₀)² p(x) σ₀(dx)`.
pub fn oracle_hessian(spec: &DgpSpec, quad: Quadrature) -> Result<OracleValue> {
    check_supported(
        spec,
        &[DgpVariant::MultScale, DgpVariant::AddShock, DgpVariant::Iid],
    )?;
    quad.validate()?;
    let value = hessian_at(spec, quad)?;
    let coarse = hessian_at(spec, quad.halved())?;
    Ok(OracleValue {
        value,
        refinement_error: (value - coarse).abs(),
    })
}

/// Variance objects of the Gaussian limit; matrices are `(d−1)×(d−1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticOracle {
    pub dgp: DgpVariant,
    pub h: Vec<Vec<f64>>,
    pub omega: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
    /// Monte Carlo standard errors of `Ω` and `V` over the `u` draws.
    pub omega_se: f64,
    pub v_se: f64,
    /// Per level: sample mean and second moment of `Δ_k` over the draws.
    pub delta_mean: Vec<f64>,
    pub delta_second_moment: Vec<f64>,
    pub h_refinement_error: f64,
    /// Largest refinement error over all `Δ_k` evaluations.
    pub delta_refinement_error: f64,
    pub quadrature: Quadrature,
    pub u_draws: usize,
    pub seed: u64,
}

/// Default outer draw count for `Ω`.
pub const DEFAULT_U_DRAWS: usize = 10_000;

/// `Ω` by Monte Carlo over fresh level shocks and `V = H⁻¹ΩH⁻¹`.
///
/// Draw `r` of level `k` reads the latents a dataset built from `seed`
/// would give row (or column) `r + 1`.
pub fn oracle_variance(
    spec: &DgpSpec,
    lambda: &[f64],
    u_draws: usize,
    seed: u64,
    quad: Quadrature,
) -> Result<AsymptoticOracle> {
    check_supported(spec, &[DgpVariant::MultScale, DgpVariant::AddShock])?;
    quad.validate()?;
    if lambda.len() != spec.k_dims {
        return Err(Error::DimensionMismatch {
            expected: spec.k_dims,
            found: lambda.len(),
        });
    }
    if lambda.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(Error::InvalidArgument("lambda must be finite and nonnegative".into()));
    }
    if u_draws < 2 || u_draws > u32::MAX as usize - 1 {
        return Err(Error::InvalidArgument(format!("invalid draw count {u_draws}")));
    }
    let hess = oracle_hessian(spec, quad)?;
    let store = LatentStore::new(seed);
    let k_dims = spec.k_dims;

    let mut delta_mean = Vec::with_capacity(k_dims);
    let mut second = Vec::with_capacity(k_dims);
    let mut var_terms = 0.0;
    let mut worst_refinement: f64 = 0.0;
    for k in 0..k_dims {
        let draws: Vec<OracleValue> = (0..u_draws)
            .into_par_iter()
            .map(|r| {
                let mut idx = vec![1u32; k_dims];
                idx[k] = r as u32 + 1;
                let u = LevelShocks::from_cell(&store.cell(&idx), k, spec.d);
                oracle_delta(spec, k, &u, quad)
            })
            .collect::<Result<_>>()?;
        let deltas: Vec<f64> = draws.iter().map(|o| o.value).collect();
        let squares: Vec<f64> = deltas.iter().map(|d| d * d).collect();
        worst_refinement = draws
            .iter()
            .map(|o| o.refinement_error)
            .fold(worst_refinement, f64::max);
        delta_mean.push(mean(&deltas));
        second.push(mean(&squares));
        var_terms += lambda[k] * lambda[k] * variance(&squares) / u_draws as f64;
    }
    let omega: f64 = lambda.iter().zip(&second).map(|(l, m)| l * m).sum();
    let omega_se = var_terms.sqrt();
    let h = hess.value;
    let v = omega / (h * h);
    Ok(AsymptoticOracle {
        dgp: spec.variant,
        h: vec![vec![h]],
        omega: vec![vec![omega]],
        v: vec![vec![v]],
        lambda: lambda.to_vec(),
        omega_se,
        v_se: omega_se / (h * h),
        delta_mean,
        delta_second_moment: second,
        h_refinement_error: hess.refinement_error,
        delta_refinement_error: worst_refinement,
        quadrature: quad,
        u_draws,
        seed,
    })
}
