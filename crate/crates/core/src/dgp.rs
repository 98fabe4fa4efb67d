//! Built-in binary-choice designs `W_i = τ({U_{i⊙e}})`.
//!
//! Every continuous design draws covariates from a row shock, a column
//! shock and a cell shock, `x_l = z(U_{(i,0)}) + z(U_{(0,j)}) + z(U_{(i,j)})`,
//! and sets `Y = 2·1{X'β₀ − ε ≥ 0} − 1`. They differ in the error:
//!
//! * `MultScale`: `ε = s·z(U_{(i,j)}, e)` with `s = 1 + ½z_row² + ½z_col²`,
//!   conditionally symmetric given every shock subset, so the first-order
//!   influence terms vanish and the Gaussian limit is degenerate.
//! * `AddShock`: `ε = z_row + z_col + z_cell` on the `e` channel; median zero
//!   given `X` but not given a row shock, which gives a non-degenerate limit.
//! * `Iid`: only cell shocks, the classical cube-root regime.
//! * `DiscreteTest`: Bernoulli(½) bits with closed-form projections.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arrays::{CellLatents, MultiIndexGrid, Pattern};
use crate::dataset::Observation;
use crate::error::{Error, Result};
use crate::stats::normal_quantile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DgpVariant {
    MultScale,
    AddShock,
    Iid,
    DiscreteTest,
}

impl DgpVariant {
    pub const ALL: [DgpVariant; 4] = [
        DgpVariant::MultScale,
        DgpVariant::AddShock,
        DgpVariant::Iid,
        DgpVariant::DiscreteTest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DgpVariant::MultScale => "mult-scale",
            DgpVariant::AddShock => "add-shock",
            DgpVariant::Iid => "iid",
            DgpVariant::DiscreteTest => "discrete-test",
        }
    }
}

impl fmt::Display for DgpVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DgpVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DgpVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::UnknownVariant {
                kind: "dgp",
                value: s.to_owned(),
            })
    }
}

/// Channel names of the covariate shocks.
const X_CHANNELS: [&str; 8] = ["x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8"];
/// Largest covariate dimension of the continuous designs.
pub const MAX_DGP_DIM: usize = X_CHANNELS.len();

pub const CHANNEL_EPS: &str = "e";
pub const CHANNEL_SCALE: &str = "s";
pub const CHANNEL_BIT: &str = "b";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub variant: DgpVariant,
    /// Covariate dimension `d`.
    pub d: usize,
    /// True direction `β₀` on the unit sphere.
    pub beta0: Vec<f64>,
    /// Number of clustering dimensions `K`.
    pub k_dims: usize,
}

impl DgpSpec {
    /// Default design: `d = 2`, `β₀ = (1,1)/√2`, `K = 2`.
    pub fn new(variant: DgpVariant) -> Self {
        Self::with_dim(variant, 2).expect("d = 2 is always valid")
    }

    /// Design with covariate dimension `d` and `β₀ = (1,…,1)/√d`.
    pub fn with_dim(variant: DgpVariant, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDgp("d must be positive".into()));
        }
        let c = 1.0 / (d as f64).sqrt();
        Self::with_beta0(variant, vec![c; d])
    }

    pub fn with_beta0(variant: DgpVariant, beta0: Vec<f64>) -> Result<Self> {
        let spec = Self {
            variant,
            d: beta0.len(),
            beta0,
            k_dims: 2,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_k_dims(mut self, k_dims: usize) -> Result<Self> {
        self.k_dims = k_dims;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.variant == DgpVariant::DiscreteTest {
            if self.k_dims == 0 || self.k_dims > 8 {
                return Err(Error::InvalidDgp(format!(
                    "discrete-test supports 1..=8 dimensions, got {}",
                    self.k_dims
                )));
            }
            return Ok(());
        }
        if self.k_dims != 2 {
            return Err(Error::InvalidDgp(format!(
                "{} is defined for K = 2 only, got K = {}",
                self.variant, self.k_dims
            )));
        }
        if self.d < 2 || self.d > MAX_DGP_DIM {
            return Err(Error::InvalidDgp(format!(
                "covariate dimension must be in 2..={MAX_DGP_DIM}, got {}",
                self.d
            )));
        }
        if self.beta0.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: self.beta0.len(),
            });
        }
        let norm = self.beta0.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDgp(format!("beta0 must be a unit vector (norm {norm})")));
        }
        Ok(())
    }

    /// Length of the covariate vector emitted by [`evaluate_tau`].
    pub fn observable_dim(&self) -> usize {
        match self.variant {
            DgpVariant::DiscreteTest => 1,
            _ => self.d,
        }
    }

    pub fn check_grid(&self, grid: &MultiIndexGrid) -> Result<()> {
        self.validate()?;
        if grid.k_dims() != self.k_dims {
            return Err(Error::DimensionMismatch {
                expected: self.k_dims,
                found: grid.k_dims(),
            });
        }
        Ok(())
    }
}

/// Evaluates `τ` on the latents of one cell.
pub fn evaluate_tau(spec: &DgpSpec, latents: &impl CellLatents) -> Result<Observation> {
    if latents.k_dims() != spec.k_dims {
        return Err(Error::DimensionMismatch {
            expected: spec.k_dims,
            found: latents.k_dims(),
        });
    }
    let k = spec.k_dims;
    if spec.variant == DgpVariant::DiscreteTest {
        let v = Pattern::all_nonzero(k)
            .into_iter()
            .filter(|&p| latents.uniform(p, CHANNEL_BIT) < 0.5)
            .count();
        return Ok(Observation {
            y: 1,
            x: vec![v as f64],
        });
    }

    let (x, eps) = covariates_and_error(spec, latents);
    let index: f64 = x.iter().zip(&spec.beta0).map(|(a, b)| a * b).sum();
    let y = if index - eps >= 0.0 { 1 } else { -1 };
    Ok(Observation { y, x })
}

/// Covariates and latent error of a continuous design.
pub(crate) fn covariates_and_error(spec: &DgpSpec, latents: &impl CellLatents) -> (Vec<f64>, f64) {
    let k = spec.k_dims;
    let z = |p: Pattern, ch: &str| normal_quantile(latents.uniform(p, ch));
    let row = Pattern::unit(0, k);
    let col = Pattern::unit(1, k);
    let cell = Pattern::full(k);

    let x: Vec<f64> = X_CHANNELS[..spec.d]
        .iter()
        .map(|&ch| match spec.variant {
            DgpVariant::Iid => z(cell, ch),
            _ => z(row, ch) + z(col, ch) + z(cell, ch),
        })
        .collect();

    let eps = match spec.variant {
        DgpVariant::MultScale => {
            let zr = z(row, CHANNEL_SCALE);
            let zc = z(col, CHANNEL_SCALE);
            let s = 1.0 + 0.5 * zr * zr + 0.5 * zc * zc;
            s * z(cell, CHANNEL_EPS)
        }
        DgpVariant::AddShock => {
            z(row, CHANNEL_EPS) + z(col, CHANNEL_EPS) + z(cell, CHANNEL_EPS)
        }
        DgpVariant::Iid => z(cell, CHANNEL_EPS),
        DgpVariant::DiscreteTest => unreachable!("discrete design has no latent error"),
    };
    (x, eps)
}
