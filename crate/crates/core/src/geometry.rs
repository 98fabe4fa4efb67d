//! Hemisphere chart `β(θ) = B₀θ + √(1 − ‖θ‖²)·β₀` around a reference
//! direction and its inverse `θ = B₀'β`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit vector in `ℝ^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Accepts a vector whose norm is 1 within `1e-12`.
    pub fn new(b: Vec<f64>) -> Result<Self> {
        let norm = norm(&b);
        if b.is_empty() || !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDirection(format!("norm {norm} is not 1")));
        }
        Ok(Self(b))
    }

    /// Normalizes any nonzero finite vector.
    pub fn normalize(b: &[f64]) -> Result<Self> {
        let norm = norm(b);
        if b.is_empty() || !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidDirection("cannot normalize a zero vector".into()));
        }
        Ok(Self(b.iter().map(|v| v / norm).collect()))
    }

    /// `(cos φ, sin φ)`.
    pub fn from_angle(phi: f64) -> Self {
        Self(vec![phi.cos(), phi.sin()])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|v| -v).collect())
    }

    /// Angle in `[0, 2π)` of a two-dimensional direction.
    pub fn angle(&self) -> f64 {
        assert_eq!(self.0.len(), 2, "angle is defined for d = 2 only");
        self.0[1].atan2(self.0[0]).rem_euclid(std::f64::consts::TAU)
    }
}

impl TryFrom<Vec<f64>> for Direction {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Direction::new(v)
    }
}

impl From<Direction> for Vec<f64> {
    fn from(d: Direction) -> Self {
        d.0
    }
}

/// Local coordinate `θ ∈ ℝ^{d−1}` with `‖θ‖ ≤ 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LocalCoord(Vec<f64>);

impl LocalCoord {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        let n = norm(&theta);
        if !n.is_finite() || n > 1.0 + 1e-12 {
            return Err(Error::OutsideBall(n));
        }
        Ok(Self(theta))
    }

    pub fn zero(k: usize) -> Self {
        Self(vec![0.0; k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl TryFrom<Vec<f64>> for LocalCoord {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        LocalCoord::new(v)
    }
}

impl From<LocalCoord> for Vec<f64> {
    fn from(t: LocalCoord) -> Self {
        t.0
    }
}

/// Reference direction `b0` with an orthonormal basis `B₀` of its complement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplementBasis {
    b0: Direction,
    /// The `d − 1` columns of `B₀`.
    columns: Vec<Vec<f64>>,
}

impl ComplementBasis {
    pub fn reference(&self) -> &Direction {
        &self.b0
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn dim(&self) -> usize {
        self.b0.dim()
    }

    /// `B₀'v`.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.columns.iter().map(|c| dot(c, v)).collect()
    }

    /// Jacobian `β̇(θ) = B₀ − β₀θ'/√(1 − ‖θ‖²)` as `d` rows of length `d − 1`.
    /// Singular on the boundary `‖θ‖ = 1`.
    pub fn jacobian(&self, theta: &LocalCoord) -> Result<Vec<Vec<f64>>> {
        let t = theta.as_slice();
        if t.len() + 1 != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim() - 1,
                found: t.len(),
            });
        }
        let r = (1.0 - dot(t, t)).sqrt();
        if r == 0.0 {
            return Err(Error::OutsideBall(1.0));
        }
        Ok((0..self.dim())
            .map(|row| {
                (0..t.len())
                    .map(|col| self.columns[col][row] - self.b0.as_slice()[row] * t[col] / r)
                    .collect()
            })
            .collect())
    }
}

/// Builds `B₀` from the columns `2..d` of the Householder reflector that
/// maps `b0` onto `∓e₁`, with the reflection sign chosen to avoid
/// cancellation. For `b0 = ±e₁` this is the canonical complement
/// `(e₂, …, e_d)`.
pub fn basis_complement(b0: &Direction) -> Result<ComplementBasis> {
    let b = b0.as_slice();
    let d = b.len();
    if d < 2 {
        return Err(Error::InvalidDirection("need d ≥ 2 for a complement".into()));
    }
    if norm(b) == 0.0 {
        return Err(Error::InvalidDirection("zero reference vector".into()));
    }
    let sign = if b[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut w = b.to_vec();
    w[0] += sign;
    let ww = dot(&w, &w);
    let columns = (1..d)
        .map(|j| {
            // Column j of I − 2ww'/(w'w).
            let f = 2.0 * w[j] / ww;
            (0..d)
                .map(|i| f64::from(u8::from(i == j)) - f * w[i])
                .collect()
        })
        .collect();
    Ok(ComplementBasis {
        b0: b0.clone(),
        columns,
    })
}

/// `β(θ) = B₀θ + √(1 − ‖θ‖²)·b0`.
pub fn beta_of_theta(basis: &ComplementBasis, theta: &LocalCoord) -> Result<Direction> {
    let t = theta.as_slice();
    if t.len() + 1 != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim() - 1,
            found: t.len(),
        });
    }
    let tt = dot(t, t);
    if tt > 1.0 + 1e-12 {
        return Err(Error::OutsideBall(tt.sqrt()));
    }
    let r = (1.0 - tt).max(0.0).sqrt();
    let mut beta: Vec<f64> = basis.b0.as_slice().iter().map(|v| r * v).collect();
    for (c, &tc) in basis.columns.iter().zip(t) {
        for (bi, ci) in beta.iter_mut().zip(c) {
            *bi += tc * ci;
        }
    }
    // Renormalize away rounding so the unit-norm invariant holds to 1e-12.
    Direction::normalize(&beta)
}

/// Reflects `beta` into the closed hemisphere `{β : β'b0 ≥ 0}`.
pub fn reflect_to_hemisphere(basis: &ComplementBasis, beta: &Direction) -> (Direction, bool) {
    if basis.b0.dot(beta.as_slice()) < 0.0 {
        (beta.neg(), true)
    } else {
        (beta.clone(), false)
    }
}

/// `θ = B₀'β`, after reflecting `beta` into the hemisphere of `b0`.
pub fn theta_of_beta(basis: &ComplementBasis, beta: &Direction) -> Result<LocalCoord> {
    if beta.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: beta.dim(),
        });
    }
    let (beta, _) = reflect_to_hemisphere(basis, beta);
    let mut theta = basis.project(beta.as_slice());
    let n = norm(&theta);
    if n > 1.0 {
        // Rounding only; a unit vector's projection has norm ≤ 1.
        theta.iter_mut().for_each(|v| *v /= n);
    }
    LocalCoord::new(theta)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
