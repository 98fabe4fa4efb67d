//! The sample score `Q̂(b) = |I|⁻¹ Σ w_i y_i 1{x_i'b ≥ 0}` and its exact
//! maximizers: an angular sweep for `d = 2` and enumeration of hyperplane
//! arrangement cells for `2 ≤ d ≤ 4`.
//!
//! Weights are per record (in index-lexicographic order). Records with
//! zero weight are skipped everywhere, so an estimate on weighted data is
//! identical to the estimate on the sub-dataset of positively weighted
//! records.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::{dot, norm, theta_of_beta, ComplementBasis, Direction, LocalCoord};

/// Closed estimation set `𝓑 ⊆ 𝕊^{d−1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ConstraintSet {
    FullSphere,
    /// `{b : b'r ≥ 0}`.
    Hemisphere { reference: Direction },
    /// `{b : |b_l| ≥ η}` with a zero-based component index.
    ComponentBound { index: usize, bound: f64 },
}

impl ConstraintSet {
    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            ConstraintSet::FullSphere => Ok(()),
            ConstraintSet::Hemisphere { reference } => {
                if reference.dim() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: reference.dim(),
                    });
                }
                Ok(())
            }
            ConstraintSet::ComponentBound { index, bound } => {
                if *index >= d {
                    return Err(Error::InvalidConstraint(format!(
                        "component {} out of range for d = {d}",
                        index + 1
                    )));
                }
                if !(*bound > 0.0 && *bound < 1.0) {
                    return Err(Error::InvalidConstraint(format!(
                        "bound must lie in (0, 1), got {bound}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn contains(&self, b: &[f64]) -> bool {
        match self {
            ConstraintSet::FullSphere => true,
            ConstraintSet::Hemisphere { reference } => reference.dot(b) >= 0.0,
            ConstraintSet::ComponentBound { index, bound } => b[*index].abs() >= *bound,
        }
    }

    /// Points of the circle where the constraint boundary lies (`d = 2`),
    /// constructed so that each is itself feasible.
    fn boundary_directions_2d(&self) -> Vec<[f64; 2]> {
        match self {
            ConstraintSet::FullSphere => Vec::new(),
            ConstraintSet::Hemisphere { reference } => {
                let r = reference.as_slice();
                vec![[-r[1], r[0]], [r[1], -r[0]]]
            }
            ConstraintSet::ComponentBound { index, bound } => {
                let other = (1.0 - bound * bound).sqrt();
                let mut out = Vec::with_capacity(4);
                for &a in &[*bound, -*bound] {
                    for &c in &[other, -other] {
                        out.push(if *index == 0 { [a, c] } else { [c, a] });
                    }
                }
                out
            }
        }
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintSet::FullSphere => f.write_str("full-sphere"),
            ConstraintSet::Hemisphere { reference } => {
                write!(f, "hemisphere({:?})", reference.as_slice())
            }
            ConstraintSet::ComponentBound { index, bound } => {
                write!(f, "|b{}| >= {bound}", index + 1)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Sweep,
    Enumerate,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Sweep => "sweep",
            Method::Enumerate => "enumerate",
        })
    }
}

/// Optimizer selection; `Auto` sweeps when `d = 2` and enumerates otherwise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    #[default]
    Auto,
    Sweep,
    Enumerate,
}

impl Optimizer {
    pub fn name(self) -> &'static str {
        match self {
            Optimizer::Auto => "auto",
            Optimizer::Sweep => "sweep",
            Optimizer::Enumerate => "enumerate",
        }
    }

    fn resolve(self, d: usize) -> Method {
        match self {
            Optimizer::Auto if d == 2 => Method::Sweep,
            Optimizer::Auto => Method::Enumerate,
            Optimizer::Sweep => Method::Sweep,
            Optimizer::Enumerate => Method::Enumerate,
        }
    }

    /// One-shot estimate.
    pub fn estimate(
        self,
        data: &Dataset,
        constraint: &ConstraintSet,
        weights: Option<&[f64]>,
    ) -> Result<DirectionEstimate> {
        self.prepare(data, constraint)?.solve(weights)
    }

    /// Precomputes weight-independent work for repeated solves on `data`.
    pub fn prepare<'a>(
        self,
        data: &'a Dataset,
        constraint: &ConstraintSet,
    ) -> Result<PreparedOptimizer<'a>> {
        Ok(match self.resolve(data.dim()) {
            Method::Sweep => PreparedOptimizer::Sweep(SweepPlan::new(data, constraint)?),
            Method::Enumerate => {
                check_enumerable(data, constraint)?;
                PreparedOptimizer::Enumerate {
                    data,
                    constraint: constraint.clone(),
                }
            }
        })
    }
}

impl fmt::Display for Optimizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Optimizer::Auto, Optimizer::Sweep, Optimizer::Enumerate]
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::UnknownVariant {
                kind: "optimizer",
                value: s.to_owned(),
            })
    }
}

pub enum PreparedOptimizer<'a> {
    Sweep(SweepPlan<'a>),
    Enumerate {
        data: &'a Dataset,
        constraint: ConstraintSet,
    },
}

impl PreparedOptimizer<'_> {
    pub fn solve(&self, weights: Option<&[f64]>) -> Result<DirectionEstimate> {
        match self {
            PreparedOptimizer::Sweep(plan) => plan.solve(weights),
            PreparedOptimizer::Enumerate { data, constraint } => {
                argmax_enumerate(data, constraint, weights)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionEstimate {
    pub beta_hat: Direction,
    /// `B₀'β̂` after reflection into the reference hemisphere, when a
    /// reference was supplied.
    pub theta_hat: Option<LocalCoord>,
    pub objective: f64,
    pub candidates_evaluated: usize,
    /// Subset systems skipped as numerically singular (enumeration only).
    pub degenerate_skipped: usize,
    pub method: Method,
}

impl DirectionEstimate {
    pub fn with_reference(mut self, basis: &ComplementBasis) -> Result<Self> {
        self.theta_hat = Some(theta_of_beta(basis, &self.beta_hat)?);
        Ok(self)
    }
}

fn check_weights(data: &Dataset, weights: Option<&[f64]>) -> Result<()> {
    if let Some(w) = weights {
        if w.len() != data.len() {
            return Err(Error::DimensionMismatch {
                expected: data.len(),
                found: w.len(),
            });
        }
        if let Some(i) = w.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "weight {i} is {} (must be finite and nonnegative)",
                w[i]
            )));
        }
    }
    Ok(())
}

#[inline]
fn weight(weights: Option<&[f64]>, i: usize) -> f64 {
    weights.map_or(1.0, |w| w[i])
}

/// `Σ w_i y_i 1{x_i'b ≥ 0}` in record order, skipping zero weights.
fn raw_score(data: &Dataset, b: &[f64], weights: Option<&[f64]>) -> f64 {
    let mut sum = 0.0;
    for i in 0..data.len() {
        let w = weight(weights, i);
        if w == 0.0 {
            continue;
        }
        if dot(data.x(i), b) >= 0.0 {
            sum += w * f64::from(data.y(i));
        }
    }
    sum
}

/// Sample score at `b`, one optional weight per record.
pub fn objective(data: &Dataset, b: &Direction, weights: Option<&[f64]>) -> Result<f64> {
    if b.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: b.dim(),
        });
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_weights(data, weights)?;
    Ok(raw_score(data, b.as_slice(), weights) / data.len() as f64)
}

/// Exact maximizer for `d = 2` by sweeping the critical angles.
pub fn argmax_sweep_2d(
    data: &Dataset,
    constraint: &ConstraintSet,
    weights: Option<&[f64]>,
) -> Result<DirectionEstimate> {
    SweepPlan::new(data, constraint)?.solve(weights)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EventKind {
    /// Record enters the half-circle `x'b ≥ 0`.
    Start,
    /// Record leaves it after this angle.
    End,
    /// Constraint boundary.
    Boundary,
}

#[derive(Clone, Copy, Debug)]
struct Event {
    angle: f64,
    kind: EventKind,
    /// Record index, or boundary direction index.
    source: usize,
}

/// Sorted critical angles of a fixed `d = 2` dataset and constraint,
/// reusable across weight vectors.
pub struct SweepPlan<'a> {
    data: &'a Dataset,
    constraint: ConstraintSet,
    events: Vec<Event>,
    boundary: Vec<[f64; 2]>,
}

fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl<'a> SweepPlan<'a> {
    pub fn new(data: &'a Dataset, constraint: &ConstraintSet) -> Result<Self> {
        if data.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: data.dim(),
            });
        }
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        constraint.validate(2)?;
        let mut events = Vec::with_capacity(2 * data.len());
        for i in 0..data.len() {
            let x = data.x(i);
            if x[0] == 0.0 && x[1] == 0.0 {
                continue;
            }
            let psi = x[1].atan2(x[0]);
            events.push(Event {
                angle: wrap_angle(psi - FRAC_PI_2),
                kind: EventKind::Start,
                source: i,
            });
            events.push(Event {
                angle: wrap_angle(psi + FRAC_PI_2),
                kind: EventKind::End,
                source: i,
            });
        }
        let boundary = constraint.boundary_directions_2d();
        for (j, b) in boundary.iter().enumerate() {
            events.push(Event {
                angle: wrap_angle(b[1].atan2(b[0])),
                kind: EventKind::Boundary,
                source: j,
            });
        }
        events.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        Ok(Self {
            data,
            constraint: constraint.clone(),
            events,
            boundary,
        })
    }

    fn event_direction(&self, e: &Event) -> Vec<f64> {
        match e.kind {
            EventKind::Boundary => self.boundary[e.source].to_vec(),
            EventKind::Start | EventKind::End => {
                let x = self.data.x(e.source);
                let v = if e.kind == EventKind::Start {
                    [x[1], -x[0]]
                } else {
                    [-x[1], x[0]]
                };
                Direction::normalize(&v)
                    .expect("nonzero covariate")
                    .into()
            }
        }
    }

    pub fn solve(&self, weights: Option<&[f64]>) -> Result<DirectionEstimate> {
        let data = self.data;
        check_weights(data, weights)?;
        let active = |e: &Event| e.kind == EventKind::Boundary || weight(weights, e.source) > 0.0;
        let contribution =
            |e: &Event| weight(weights, e.source) * f64::from(data.y(e.source));

        let first = self.events.iter().find(|e| active(e));
        let last = self.events.iter().rev().find(|e| active(e));
        let (Some(first), Some(last)) = (first, last) else {
            // No critical angles: the score is constant on the circle.
            let b = [1.0, 0.0];
            if !self.constraint.contains(&b) {
                return Err(Error::InfeasibleConstraint);
            }
            return self.finish(vec![b.to_vec()], 1, weights);
        };

        let wrap_mid = wrap_angle(0.5 * (last.angle + first.angle + TAU));
        let wrap_dir = vec![wrap_mid.cos(), wrap_mid.sin()];
        let base = raw_score(data, &wrap_dir, weights);
        let scale: f64 = (0..data.len())
            .map(|i| weight(weights, i))
            .sum::<f64>()
            .max(1.0);
        let tol = 1e-9 * scale;

        // (sweep value, direction) of every feasible candidate.
        let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
        if self.constraint.contains(&wrap_dir) {
            candidates.push((base, wrap_dir));
        }
        let mut v = base;
        let mut g = self
            .events
            .iter()
            .position(|e| std::ptr::eq(e, first))
            .expect("first active event");
        let n_events = self.events.len();
        while g < n_events {
            let angle = self.events[g].angle;
            let mut end = g;
            let (mut starts, mut ends) = (0.0, 0.0);
            let mut group_dirs = Vec::new();
            while end < n_events && self.events[end].angle == angle {
                let e = &self.events[end];
                if active(e) {
                    match e.kind {
                        EventKind::Start => starts += contribution(e),
                        EventKind::End => ends += contribution(e),
                        EventKind::Boundary => {}
                    }
                    group_dirs.push(self.event_direction(e));
                }
                end += 1;
            }
            let critical = v + starts;
            for dir in group_dirs {
                if self.constraint.contains(&dir) {
                    candidates.push((critical, dir));
                }
            }
            v = critical - ends;
            let next = self.events[end..].iter().find(|e| active(e));
            match next {
                Some(n) => {
                    let mid = 0.5 * (angle + n.angle);
                    let dir = vec![mid.cos(), mid.sin()];
                    if self.constraint.contains(&dir) {
                        candidates.push((v, dir));
                    }
                    g = end + self.events[end..].iter().position(|e| active(e)).unwrap();
                }
                None => break,
            }
        }
        if candidates.is_empty() {
            return Err(Error::InfeasibleConstraint);
        }
        let evaluated = candidates.len();
        let best = candidates
            .iter()
            .map(|c| c.0)
            .fold(f64::NEG_INFINITY, f64::max);
        let near: Vec<Vec<f64>> = candidates
            .into_iter()
            .filter(|c| c.0 >= best - tol)
            .map(|c| c.1)
            .collect();
        self.finish(near, evaluated, weights)
    }

    /// Direct evaluation of the short list; highest score, then smallest
    /// angle in `[0, 2π)`.
    fn finish(
        &self,
        near: Vec<Vec<f64>>,
        evaluated: usize,
        weights: Option<&[f64]>,
    ) -> Result<DirectionEstimate> {
        let mut best: Option<(f64, f64, Vec<f64>)> = None;
        for dir in near {
            let score = raw_score(self.data, &dir, weights);
            let angle = wrap_angle(dir[1].atan2(dir[0]));
            let better = match &best {
                None => true,
                Some((s, a, _)) => score > *s || (score == *s && angle < *a),
            };
            if better {
                best = Some((score, angle, dir));
            }
        }
        let (score, _, dir) = best.ok_or(Error::InfeasibleConstraint)?;
        Ok(DirectionEstimate {
            // Every candidate is unit to rounding already; keep its exact bits
            // so the reported objective belongs to the returned vector.
            beta_hat: Direction::new(dir)?,
            theta_hat: None,
            objective: score / self.data.len() as f64,
            candidates_evaluated: evaluated,
            degenerate_skipped: 0,
            method: Method::Sweep,
        })
    }
}

/// Largest covariate dimension supported by [`argmax_enumerate`].
pub const MAX_ENUMERATE_DIM: usize = 4;

fn check_enumerable(data: &Dataset, constraint: &ConstraintSet) -> Result<()> {
    let d = data.dim();
    if !(2..=MAX_ENUMERATE_DIM).contains(&d) {
        return Err(Error::Unsupported(format!(
            "exact enumeration supports 2 <= d <= {MAX_ENUMERATE_DIM}, got d = {d}"
        )));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    constraint.validate(d)
}

/// Generalized cross product of `d − 1` rows in `ℝ^d`.
fn cofactor_normal(rows: &[&[f64]], d: usize) -> Vec<f64> {
    (0..d)
        .map(|j| {
            let cols: Vec<usize> = (0..d).filter(|&c| c != j).collect();
            let m = DMatrix::from_fn(d - 1, d - 1, |r, c| rows[r][cols[c]]);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * m.determinant()
        })
        .collect()
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

#[derive(Clone, Debug)]
struct Best {
    score: f64,
    dir: Vec<f64>,
}

fn better(a: Option<Best>, b: Option<Best>) -> Option<Best> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            let keep_a = match a.score.total_cmp(&b.score) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => lexicographic(&a.dir, &b.dir) != Ordering::Greater,
            };
            Some(if keep_a { a } else { b })
        }
    }
}

#[derive(Clone, Debug, Default)]
struct Tally {
    best: Option<Best>,
    evaluated: usize,
    degenerate: usize,
    nondegenerate: usize,
}

impl Tally {
    fn merge(self, other: Tally) -> Tally {
        Tally {
            best: better(self.best, other.best),
            evaluated: self.evaluated + other.evaluated,
            degenerate: self.degenerate + other.degenerate,
            nondegenerate: self.nondegenerate + other.nondegenerate,
        }
    }
}

/// Exact maximizer for `2 ≤ d ≤ 4` by visiting a representative of every
/// cell of the arrangement `{b : x_i'b = 0}`.
///
/// `ComponentBound` only filters candidates, so an optimum lying on the
/// bound itself can be missed; the sweep handles it exactly for `d = 2`.
pub fn argmax_enumerate(
    data: &Dataset,
    constraint: &ConstraintSet,
    weights: Option<&[f64]>,
) -> Result<DirectionEstimate> {
    check_enumerable(data, constraint)?;
    check_weights(data, weights)?;
    let d = data.dim();
    let mut rows: Vec<Vec<f64>> = (0..data.len())
        .filter(|&i| weight(weights, i) > 0.0 && data.x(i).iter().any(|&v| v != 0.0))
        .map(|i| data.x(i).to_vec())
        .collect();
    let mut norms: Vec<f64> = rows.iter().map(|r| norm(r)).collect();
    norms.sort_by(f64::total_cmp);
    let delta = if norms.is_empty() {
        1e-9
    } else {
        1e-9 * norms[norms.len() / 2]
    };
    if let ConstraintSet::Hemisphere { reference } = constraint {
        rows.push(reference.as_slice().to_vec());
    }

    let mut tally = enumerate_rows(data, constraint, weights, &rows, delta);
    if tally.nondegenerate == 0 {
        // Too few usable rows to pin down vertices; coordinate hyperplanes
        // give every cell a representative.
        let skipped = tally.degenerate;
        for l in 0..d {
            let mut e = vec![0.0; d];
            e[l] = 1.0;
            rows.push(e);
        }
        tally = enumerate_rows(data, constraint, weights, &rows, delta);
        tally.degenerate += skipped;
    }
    if tally.degenerate > 0 {
        log::debug!("enumeration skipped {} degenerate subsets", tally.degenerate);
    }
    let best = tally.best.ok_or(Error::InfeasibleConstraint)?;
    Ok(DirectionEstimate {
        objective: best.score / data.len() as f64,
        beta_hat: Direction::new(best.dir)?,
        theta_hat: None,
        candidates_evaluated: tally.evaluated,
        degenerate_skipped: tally.degenerate,
        method: Method::Enumerate,
    })
}

fn enumerate_rows(
    data: &Dataset,
    constraint: &ConstraintSet,
    weights: Option<&[f64]>,
    rows: &[Vec<f64>],
    delta: f64,
) -> Tally {
    let d = data.dim();
    let k = d - 1;
    let m = rows.len();
    if m < k {
        return Tally::default();
    }
    (0..=m - k)
        .into_par_iter()
        .map(|first| {
            let mut tally = Tally::default();
            let mut idx: Vec<usize> = (first..first + k).collect();
            loop {
                visit_subset(data, constraint, weights, rows, &idx, delta, &mut tally);
                // Advance the tail (positions 1..k) to the next combination.
                let mut pos = k;
                loop {
                    if pos <= 1 {
                        return tally;
                    }
                    pos -= 1;
                    if idx[pos] < m - (k - pos) {
                        idx[pos] += 1;
                        for q in pos + 1..k {
                            idx[q] = idx[q - 1] + 1;
                        }
                        break;
                    }
                }
            }
        })
        .reduce(Tally::default, Tally::merge)
}

fn visit_subset(
    data: &Dataset,
    constraint: &ConstraintSet,
    weights: Option<&[f64]>,
    rows: &[Vec<f64>],
    idx: &[usize],
    delta: f64,
    tally: &mut Tally,
) {
    let d = data.dim();
    let subset: Vec<&[f64]> = idx.iter().map(|&i| rows[i].as_slice()).collect();
    let n = cofactor_normal(&subset, d);
    let scale: f64 = subset.iter().map(|r| norm(r)).product();
    let nn = norm(&n);
    if !(nn > 1e-12 * scale) {
        tally.degenerate += 1;
        return;
    }
    let Ok(unit) = Direction::normalize(&n) else {
        tally.degenerate += 1;
        return;
    };
    let unit: Vec<f64> = unit.into();

    // Dual vectors g_j with a_i'g_j = δ_ij and n'g_j = 0.
    let mut m = DMatrix::zeros(d, d);
    for (r, row) in subset.iter().enumerate() {
        for c in 0..d {
            m[(r, c)] = row[c];
        }
    }
    for c in 0..d {
        m[(d - 1, c)] = unit[c];
    }
    let Some(inv) = m.try_inverse() else {
        tally.degenerate += 1;
        return;
    };
    tally.nondegenerate += 1;
    let k = d - 1;

    let consider = |b: Vec<f64>, tally: &mut Tally| {
        if !constraint.contains(&b) {
            return;
        }
        tally.evaluated += 1;
        let score = raw_score(data, &b, weights);
        tally.best = better(tally.best.take(), Some(Best { score, dir: b }));
    };

    for sign in [1.0, -1.0] {
        let base: Vec<f64> = unit.iter().map(|v| sign * v).collect();
        consider(base.clone(), tally);
        for mask in 0u32..(1 << k) {
            let signs: Vec<f64> = (0..k)
                .map(|j| if mask >> j & 1 == 1 { -1.0 } else { 1.0 })
                .collect();
            let mut step = delta;
            let mut candidate = None;
            for _ in 0..6 {
                let mut b = base.clone();
                for (j, s) in signs.iter().enumerate() {
                    for c in 0..d {
                        b[c] += step * s * inv[(c, j)];
                    }
                }
                let Ok(b) = Direction::normalize(&b) else { break };
                let b: Vec<f64> = b.into();
                let ok = subset
                    .iter()
                    .zip(&signs)
                    .all(|(row, s)| dot(row, &b) * s > 0.0);
                candidate = Some(b);
                if ok {
                    break;
                }
                step *= 10.0;
            }
            if let Some(b) = candidate {
                consider(b, tally);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrays::MultiIndexGrid;
    use crate::dataset::Observation;

    fn data(points: &[(i8, &[f64])]) -> Dataset {
        let n = points.len();
        let grid = MultiIndexGrid::new(vec![n]).unwrap();
        let d = points[0].1.len();
        let recs = points
            .iter()
            .enumerate()
            .map(|(i, (y, x))| (vec![i as u32 + 1], Observation::new(*y, x.to_vec()).unwrap()))
            .collect();
        Dataset::from_records(grid, d, recs).unwrap()
    }

    fn dir(v: &[f64]) -> Direction {
        Direction::new(v.to_vec()).unwrap()
    }

    #[test]
    fn objective_examples() {
        let one = data(&[(1, &[1.0, 0.0])]);
        assert_eq!(objective(&one, &dir(&[1.0, 0.0]), None).unwrap(), 1.0);
        let edge = data(&[(1, &[0.0, 1.0])]);
        assert_eq!(objective(&edge, &dir(&[1.0, 0.0]), None).unwrap(), 1.0);
        let three = data(&[(1, &[1.0, 0.0]), (-1, &[0.0, 1.0]), (1, &[-1.0, 1.0])]);
        let q = objective(&three, &dir(&[0.0, 1.0]), None).unwrap();
        assert!((q - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn objective_rejects_wrong_dimension() {
        let one = data(&[(1, &[1.0, 0.0])]);
        assert!(objective(&one, &dir(&[1.0, 0.0, 0.0]), None).is_err());
    }

    #[test]
    fn sweep_single_point_breaks_tie_at_zero() {
        let one = data(&[(1, &[1.0, 0.0])]);
        let est = argmax_sweep_2d(&one, &ConstraintSet::FullSphere, None).unwrap();
        assert_eq!(est.beta_hat.as_slice(), &[1.0, 0.0]);
        assert_eq!(est.objective, 1.0);
    }

    #[test]
    fn sweep_finds_isolated_critical_optimum() {
        // Only b = (0, 1) keeps both +1 points without the -1 point.
        let pts = data(&[
            (1, &[1.0, 0.0]),
            (1, &[-1.0, 0.0]),
            (-1, &[0.0, -1.0]),
        ]);
        let est = argmax_sweep_2d(&pts, &ConstraintSet::FullSphere, None).unwrap();
        assert!((est.objective - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(est.beta_hat.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn sweep_respects_hemisphere() {
        let pts = data(&[(1, &[-1.0, 0.1])]);
        let c = ConstraintSet::Hemisphere {
            reference: dir(&[1.0, 0.0]),
        };
        let est = argmax_sweep_2d(&pts, &c, None).unwrap();
        assert!(c.contains(est.beta_hat.as_slice()));
        assert_eq!(est.objective, 1.0);
    }

    #[test]
    fn sweep_respects_component_bound() {
        let pts = data(&[(1, &[0.0, 1.0]), (-1, &[0.0, -1.0])]);
        let c = ConstraintSet::ComponentBound {
            index: 0,
            bound: 0.5,
        };
        let est = argmax_sweep_2d(&pts, &c, None).unwrap();
        assert!(est.beta_hat.as_slice()[0].abs() >= 0.5);
        assert_eq!(est.objective, 0.5);
    }

    #[test]
    fn invalid_constraints_rejected() {
        let pts = data(&[(1, &[1.0, 0.0])]);
        for c in [
            ConstraintSet::ComponentBound { index: 2, bound: 0.5 },
            ConstraintSet::ComponentBound { index: 0, bound: 1.0 },
        ] {
            assert!(matches!(
                argmax_sweep_2d(&pts, &c, None),
                Err(Error::InvalidConstraint(_))
            ));
        }
    }

    #[test]
    fn enumerate_unit_point_in_any_dimension() {
        for d in 2..=4 {
            let mut e1 = vec![0.0; d];
            e1[0] = 1.0;
            let pts = data(&[(1, &e1)]);
            let est = argmax_enumerate(&pts, &ConstraintSet::FullSphere, None).unwrap();
            assert_eq!(est.objective, 1.0, "d = {d}");
        }
    }

    #[test]
    fn enumerate_rejects_large_dimension() {
        let pts = data(&[(1, &[1.0, 0.0, 0.0, 0.0, 0.0])]);
        assert!(matches!(
            argmax_enumerate(&pts, &ConstraintSet::FullSphere, None),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn zero_weights_match_sub_dataset() {
        let pts = data(&[
            (1, &[1.0, 0.3]),
            (-1, &[0.2, 1.0]),
            (1, &[-0.7, 0.4]),
            (-1, &[-0.1, -1.0]),
        ]);
        let w = [1.0, 0.0, 2.0, 0.0];
        let sub = pts.filter(|i| w[i] > 0.0);
        let wsub = [1.0, 2.0];
        for opt in [Optimizer::Sweep, Optimizer::Enumerate] {
            let a = opt.estimate(&pts, &ConstraintSet::FullSphere, Some(&w)).unwrap();
            let b = opt.estimate(&sub, &ConstraintSet::FullSphere, Some(&wsub)).unwrap();
            assert_eq!(a.beta_hat, b.beta_hat, "{opt}");
        }
    }

    #[test]
    fn optimizer_names_parse() {
        assert_eq!("sweep".parse::<Optimizer>().unwrap(), Optimizer::Sweep);
        assert!("grid".parse::<Optimizer>().is_err());
    }
}
