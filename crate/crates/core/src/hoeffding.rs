//! Hoeffding-type projections `π_e f` and their sample aggregates `H^e(f)`.
//!
//! `P_e f` is the conditional mean of `f(W_i)` given the latents
//! `{U_{i⊙e'}}_{e' ≤ e}`, and
//!
//! ```text
//! π_e f = P_e f − Ef − Σ_{0 ≠ e' < e} π_{e'} f,
//! ```
//!
//! i.e. the recursion applied to the explicitly centred `f − Ef`. On the
//! discrete design the conditional means are finite sums over the unfixed
//! Bernoulli(½) bits and everything is exact; on continuous designs they
//! are Monte Carlo integrals over redrawn latents.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arrays::{derive_seed, CellLatents, LatentStore, Pattern};
use crate::dataset::{Dataset, Observation};
use crate::dgp::{evaluate_tau, DgpSpec, DgpVariant, CHANNEL_BIT};
use crate::error::{Error, Result};
use crate::stats::{mean, std_dev};

/// Largest `K` for exact projections; the bit space has `2^(2^K − 1)` points.
pub const MAX_EXACT_DIMS: usize = 4;

/// Default draw count for the population mean of continuous designs.
pub const DEFAULT_EF_DRAWS: usize = 1_000_000;

/// Offset mixed into the seed of the population-mean draws.
const EF_SEED_TAG: u64 = 0xEF00_0000_0000_0001;

/// Values of the bits `b_e = 1{U_{i⊙e} < ½}` for every nonzero pattern.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitAssignment {
    k_dims: usize,
    /// Indexed by pattern mask; slot 0 is unused.
    bits: Vec<bool>,
}

impl BitAssignment {
    pub fn zeros(k_dims: usize) -> Self {
        assert!((1..=MAX_EXACT_DIMS).contains(&k_dims));
        Self {
            k_dims,
            bits: vec![false; 1 << k_dims],
        }
    }

    pub fn from_fn(k_dims: usize, mut f: impl FnMut(Pattern) -> bool) -> Self {
        let mut out = Self::zeros(k_dims);
        for p in Pattern::all_nonzero(k_dims) {
            out.bits[p.mask() as usize] = f(p);
        }
        out
    }

    /// Bits read from the latents of one cell.
    pub fn from_cell(latents: &impl CellLatents) -> Self {
        Self::from_fn(latents.k_dims(), |p| latents.uniform(p, CHANNEL_BIT) < 0.5)
    }

    pub fn k_dims(&self) -> usize {
        self.k_dims
    }

    pub fn get(&self, p: Pattern) -> bool {
        self.bits[p.mask() as usize]
    }

    pub fn set(&mut self, p: Pattern, value: bool) {
        self.bits[p.mask() as usize] = value;
    }

    /// The discrete design's observable `V = Σ_e b_e`.
    pub fn observable(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// The observation the discrete design emits for these bits.
    pub fn observation(&self) -> Observation {
        Observation {
            y: 1,
            x: vec![self.observable() as f64],
        }
    }
}

fn check_exact(spec: &DgpSpec) -> Result<()> {
    if spec.variant != DgpVariant::DiscreteTest {
        return Err(Error::Unsupported(format!(
            "exact projections need the discrete-test design, got {}",
            spec.variant
        )));
    }
    spec.validate()?;
    if spec.k_dims > MAX_EXACT_DIMS {
        return Err(Error::Unsupported(format!(
            "exact projections support K <= {MAX_EXACT_DIMS}, got K = {}",
            spec.k_dims
        )));
    }
    Ok(())
}

fn check_pattern(spec: &DgpSpec, e: Pattern) -> Result<()> {
    if e.is_zero() {
        return Err(Error::InvalidKey("pattern must have a nonzero bit".into()));
    }
    if e.k_dims() != spec.k_dims {
        return Err(Error::DimensionMismatch {
            expected: spec.k_dims,
            found: e.k_dims(),
        });
    }
    Ok(())
}

/// Mean of `f` over every assignment of the bits outside `fixed`, holding
/// the bits of patterns in `fixed` at their values in `bits`.
fn average_over_free(
    k_dims: usize,
    f: &impl Fn(&BitAssignment) -> f64,
    bits: &BitAssignment,
    fixed: impl Fn(Pattern) -> bool,
) -> f64 {
    let free: Vec<Pattern> = Pattern::all_nonzero(k_dims)
        .into_iter()
        .filter(|&p| !fixed(p))
        .collect();
    let mut work = bits.clone();
    let count = 1u64 << free.len();
    let mut sum = 0.0;
    for m in 0..count {
        for (j, &p) in free.iter().enumerate() {
            work.set(p, m >> j & 1 == 1);
        }
        sum += f(&work);
    }
    sum / count as f64
}

/// `Ef` on the discrete design.
pub fn exact_mean(spec: &DgpSpec, f: &impl Fn(&BitAssignment) -> f64) -> Result<f64> {
    check_exact(spec)?;
    let zero = BitAssignment::zeros(spec.k_dims);
    Ok(average_over_free(spec.k_dims, f, &zero, |_| false))
}

/// `P_e f` at `bits` on the discrete design.
pub fn conditional_mean_exact(
    spec: &DgpSpec,
    f: &impl Fn(&BitAssignment) -> f64,
    e: Pattern,
    bits: &BitAssignment,
) -> Result<f64> {
    check_exact(spec)?;
    check_pattern(spec, e)?;
    Ok(average_over_free(spec.k_dims, f, bits, |p| p.is_sub_of(e)))
}

/// Exact `π_e f` at `bits`; only bits of patterns `e' ≤ e` are read.
pub fn project_exact(
    spec: &DgpSpec,
    f: &impl Fn(&BitAssignment) -> f64,
    e: Pattern,
    bits: &BitAssignment,
) -> Result<f64> {
    check_exact(spec)?;
    check_pattern(spec, e)?;
    if bits.k_dims() != spec.k_dims {
        return Err(Error::DimensionMismatch {
            expected: spec.k_dims,
            found: bits.k_dims(),
        });
    }
    let ef = exact_mean(spec, f)?;
    let mut memo = HashMap::new();
    Ok(project_exact_memo(spec.k_dims, f, e, bits, ef, &mut memo))
}

fn project_exact_memo(
    k_dims: usize,
    f: &impl Fn(&BitAssignment) -> f64,
    e: Pattern,
    bits: &BitAssignment,
    ef: f64,
    memo: &mut HashMap<u32, f64>,
) -> f64 {
    if let Some(&v) = memo.get(&e.mask()) {
        return v;
    }
    let mut v = average_over_free(k_dims, f, bits, |p| p.is_sub_of(e)) - ef;
    for sub in e.sub_patterns() {
        if sub != e {
            v -= project_exact_memo(k_dims, f, sub, bits, ef, memo);
        }
    }
    memo.insert(e.mask(), v);
    v
}

/// Mean of exact `π_e f` over the bits of the patterns `e' ≤ e` with
/// `e'_ℓ = 1`, holding the bits on `e − e_ℓ` at their values in `bits`.
/// Zero for every `ℓ ∈ supp(e)` by the conditional centring property.
pub fn centering_residual(
    spec: &DgpSpec,
    f: &impl Fn(&BitAssignment) -> f64,
    e: Pattern,
    ell: usize,
    bits: &BitAssignment,
) -> Result<f64> {
    check_exact(spec)?;
    check_pattern(spec, e)?;
    if !e.contains(ell) {
        return Err(Error::InvalidArgument(format!(
            "slot {} is not in the support of {e}",
            ell + 1
        )));
    }
    let ef = exact_mean(spec, f)?;
    let varied: Vec<Pattern> = e
        .sub_patterns()
        .into_iter()
        .filter(|p| p.contains(ell))
        .collect();
    let mut work = bits.clone();
    let count = 1u64 << varied.len();
    let mut sum = 0.0;
    for m in 0..count {
        for (j, &p) in varied.iter().enumerate() {
            work.set(p, m >> j & 1 == 1);
        }
        let mut memo = HashMap::new();
        sum += project_exact_memo(spec.k_dims, f, e, &work, ef, &mut memo);
    }
    Ok(sum / count as f64)
}

/// Monte Carlo value with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub se: f64,
}

/// Latents of one cell with the patterns in `fixed` taken from `base` and
/// all others redrawn for draw `r`.
struct DrawLatents<'a, L: CellLatents> {
    base: &'a L,
    fixed: Option<Pattern>,
    draws: LatentStore,
    r: u32,
}

impl<L: CellLatents> CellLatents for DrawLatents<'_, L> {
    fn k_dims(&self) -> usize {
        self.base.k_dims()
    }

    fn uniform(&self, pattern: Pattern, channel: &str) -> f64 {
        match self.fixed {
            Some(e) if pattern.is_sub_of(e) => self.base.uniform(pattern, channel),
            // Keyed by (pattern, draw, channel) so every conditional mean of
            // one draw sees the same redrawn values.
            _ => self.draws.uniform(pattern, &[self.r], channel),
        }
    }
}

fn eval_f(spec: &DgpSpec, f: &impl Fn(&Observation) -> f64, latents: &impl CellLatents) -> f64 {
    let obs = evaluate_tau(spec, latents).expect("design validated before drawing");
    f(&obs)
}

/// Monte Carlo `π_e f` at the latents of one cell, with the recursion
/// applied draw by draw on common redrawn latents. Only `fixed`'s
/// patterns `e' ≤ e` are read.
pub fn project_mc(
    spec: &DgpSpec,
    f: &impl Fn(&Observation) -> f64,
    e: Pattern,
    fixed: &impl CellLatents,
    draws: usize,
    seed: u64,
) -> Result<McEstimate> {
    spec.validate()?;
    check_pattern(spec, e)?;
    if fixed.k_dims() != spec.k_dims {
        return Err(Error::DimensionMismatch {
            expected: spec.k_dims,
            found: fixed.k_dims(),
        });
    }
    if draws < 100 {
        return Err(Error::InvalidArgument(format!(
            "projection needs at least 100 draws, got {draws}"
        )));
    }
    if draws > u32::MAX as usize {
        return Err(Error::InvalidArgument("too many draws".into()));
    }
    let store = LatentStore::new(derive_seed(seed, &[e.mask() as u64]));
    let subs = e.sub_patterns();
    let values: Vec<f64> = (0..draws)
        .map(|r| {
            let at = |fx: Option<Pattern>| {
                eval_f(
                    spec,
                    f,
                    &DrawLatents {
                        base: fixed,
                        fixed: fx,
                        draws: store,
                        r: r as u32,
                    },
                )
            };
            let centre = at(None);
            let mut pis: HashMap<u32, f64> = HashMap::with_capacity(subs.len());
            // Sub-patterns come in increasing order, so every proper
            // sub-pattern is resolved before its super-patterns.
            for &s in &subs {
                let mut v = at(Some(s)) - centre;
                for &t in &subs {
                    if t != s && t.is_sub_of(s) {
                        v -= pis[&t.mask()];
                    }
                }
                pis.insert(s.mask(), v);
            }
            pis[&e.mask()]
        })
        .collect();
    Ok(McEstimate {
        value: mean(&values),
        se: std_dev(&values) / (draws as f64).sqrt(),
    })
}

/// Monte Carlo `Ef` from fully redrawn latents.
pub fn population_mean_mc(
    spec: &DgpSpec,
    f: &(impl Fn(&Observation) -> f64 + Sync),
    draws: usize,
    seed: u64,
) -> Result<McEstimate> {
    spec.validate()?;
    if draws < 2 || draws > u32::MAX as usize {
        return Err(Error::InvalidArgument(format!("invalid draw count {draws}")));
    }
    let store = LatentStore::new(derive_seed(seed, &[EF_SEED_TAG]));
    let unit = Unfixed { k_dims: spec.k_dims };
    let values: Vec<f64> = (0..draws)
        .into_par_iter()
        .map(|r| {
            eval_f(
                spec,
                f,
                &DrawLatents {
                    base: &unit,
                    fixed: None,
                    draws: store,
                    r: r as u32,
                },
            )
        })
        .collect();
    Ok(McEstimate {
        value: mean(&values),
        se: std_dev(&values) / (draws as f64).sqrt(),
    })
}

/// Placeholder base for fully redrawn latents.
struct Unfixed {
    k_dims: usize,
}

impl CellLatents for Unfixed {
    fn k_dims(&self) -> usize {
        self.k_dims
    }

    fn uniform(&self, _: Pattern, _: &str) -> f64 {
        unreachable!("no pattern is fixed")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum DecompositionMode {
    Exact,
    Mc { draws: usize, ef_draws: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionEntry {
    /// Pattern written as `(e_1,…,e_K)`.
    pub pattern: String,
    pub order: usize,
    /// `|I_{N,e}|`.
    pub cells: usize,
    pub h: f64,
    /// Monte Carlo standard error of `h`; absent in exact mode.
    pub se: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionTable {
    pub mode: DecompositionMode,
    /// Entries ordered by `|e|`, then lexicographically.
    pub entries: Vec<ProjectionEntry>,
    /// `E_N f`.
    pub grand_mean: f64,
    /// `Ef` used for centring.
    pub ef: f64,
    pub ef_se: Option<f64>,
    /// `E_N f − Ef`.
    pub centred_mean: f64,
    /// `E_N f − Ef − Σ_e H^e(f)`.
    pub residual: f64,
}

/// Any cell whose projection onto its pattern is `projected` (zeros
/// replaced by 1).
fn representative(projected: &[u32]) -> Vec<u32> {
    projected.iter().map(|&i| i.max(1)).collect()
}

/// Computes `H^e(f)` for every nonzero pattern from the latents attached to
/// a simulated dataset.
pub fn decompose(
    data: &Dataset,
    spec: &DgpSpec,
    f: &(impl Fn(&Observation) -> f64 + Sync),
    mode: DecompositionMode,
    seed: u64,
) -> Result<ProjectionTable> {
    spec.check_grid(data.grid())?;
    let store = *data.latents().ok_or_else(|| {
        Error::InvalidDataset("decomposition needs the latents of a simulated dataset".into())
    })?;
    if !data.is_complete() {
        return Err(Error::InvalidDataset(
            "decomposition needs a complete grid".into(),
        ));
    }
    let grid = data.grid();
    let grand_mean = mean(&(0..data.len()).map(|i| f(&data.observation(i))).collect::<Vec<_>>());
    let patterns = Pattern::all_nonzero(spec.k_dims);

    let (ef, ef_se, entries) = match mode {
        DecompositionMode::Exact => {
            check_exact(spec)?;
            let fb = |b: &BitAssignment| f(&b.observation());
            let ef = exact_mean(spec, &fb)?;
            let mut entries = Vec::with_capacity(patterns.len());
            for &e in &patterns {
                let values: Vec<f64> = grid
                    .projected_cells(e)
                    .map(|p| {
                        let cell = representative(&p);
                        let bits = BitAssignment::from_cell(&store.cell(&cell));
                        let mut memo = HashMap::new();
                        project_exact_memo(spec.k_dims, &fb, e, &bits, ef, &mut memo)
                    })
                    .collect();
                entries.push(ProjectionEntry {
                    pattern: e.to_string(),
                    order: e.order(),
                    cells: values.len(),
                    h: mean(&values),
                    se: None,
                });
            }
            (ef, None, entries)
        }
        DecompositionMode::Mc { draws, ef_draws } => {
            let pm = population_mean_mc(spec, f, ef_draws, seed)?;
            let mut entries = Vec::with_capacity(patterns.len());
            for &e in &patterns {
                let cells: Vec<Vec<u32>> = grid.projected_cells(e).collect();
                let ests: Vec<McEstimate> = cells
                    .par_iter()
                    .enumerate()
                    .map(|(j, p)| {
                        let cell = representative(p);
                        let s = derive_seed(seed, &[e.mask() as u64, j as u64]);
                        project_mc(spec, f, e, &store.cell(&cell), draws, s)
                    })
                    .collect::<Result<_>>()?;
                let count = ests.len() as f64;
                let h = ests.iter().map(|m| m.value).sum::<f64>() / count;
                let se = ests.iter().map(|m| m.se * m.se).sum::<f64>().sqrt() / count;
                entries.push(ProjectionEntry {
                    pattern: e.to_string(),
                    order: e.order(),
                    cells: ests.len(),
                    h,
                    se: Some(se),
                });
            }
            (pm.value, Some(pm.se), entries)
        }
    };
    let centred_mean = grand_mean - ef;
    let residual = entries.iter().fold(centred_mean, |r, e| r - e.h);
    Ok(ProjectionTable {
        mode,
        entries,
        grand_mean,
        ef,
        ef_se,
        centred_mean,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> DgpSpec {
        DgpSpec::new(DgpVariant::DiscreteTest)
    }

    fn bits(r: bool, c: bool, cell: bool) -> BitAssignment {
        BitAssignment::from_fn(2, |p| match p.mask() {
            0b01 => r,
            0b10 => c,
            _ => cell,
        })
    }

    fn f_v(b: &BitAssignment) -> f64 {
        b.observable() as f64 - 1.5
    }

    fn g(b: &BitAssignment) -> f64 {
        let r = f64::from(u8::from(b.get(Pattern::unit(0, 2))));
        let c = f64::from(u8::from(b.get(Pattern::unit(1, 2))));
        (r - 0.5) * (c - 0.5)
    }

    #[test]
    fn first_order_projection_of_count() {
        let v = project_exact(&spec(), &f_v, Pattern::unit(0, 2), &bits(true, false, false)).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn interaction_has_no_main_effect() {
        for r in [false, true] {
            let v = project_exact(&spec(), &g, Pattern::unit(0, 2), &bits(r, true, false)).unwrap();
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn interaction_second_order_projection() {
        let v = project_exact(&spec(), &g, Pattern::full(2), &bits(true, true, false)).unwrap();
        assert_eq!(v, 0.25);
    }

    #[test]
    fn continuous_design_rejected_in_exact_mode() {
        let s = DgpSpec::new(DgpVariant::Iid);
        assert!(matches!(
            project_exact(&s, &f_v, Pattern::unit(0, 2), &bits(true, true, true)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn full_pattern_mc_projection_needs_no_integration() {
        // P_full f = f, so the full-pattern conditional mean has no noise; the
        // centred recursion still integrates the lower patterns.
        let s = DgpSpec::new(DgpVariant::AddShock);
        let store = LatentStore::new(5);
        let idx = [2u32, 3];
        let cell = store.cell(&idx);
        let f = |o: &Observation| f64::from(o.y);
        let direct = eval_f(&s, &f, &cell);
        let draws = LatentStore::new(1);
        let all = DrawLatents {
            base: &cell,
            fixed: Some(Pattern::full(2)),
            draws,
            r: 0,
        };
        assert_eq!(eval_f(&s, &f, &all), direct);
    }

    #[test]
    fn too_few_draws_rejected() {
        let s = DgpSpec::new(DgpVariant::AddShock);
        let store = LatentStore::new(5);
        let idx = [1u32, 1];
        let f = |o: &Observation| f64::from(o.y);
        assert!(project_mc(&s, &f, Pattern::unit(0, 2), &store.cell(&idx), 10, 0).is_err());
    }
}
