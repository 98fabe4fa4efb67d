//! Multi-index grids, shock patterns and keyed latent uniforms.
//!
//! A separately exchangeable array is generated from independent uniforms
//! `U_{i ⊙ e}`, one per nonzero pattern `e ∈ {0,1}^K` and projected index
//! `i ⊙ e`. Nothing is stored: every uniform is a keyed hash of the seed,
//! the pattern, the projected index and a channel label, so values never
//! depend on evaluation order, grid growth or thread scheduling.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::dgp::{evaluate_tau, DgpSpec};
use crate::error::{Error, Result};

/// Largest number of clustering dimensions supported by [`Pattern`].
pub const MAX_DIMS: usize = 16;

/// Sizes `(N_1, …, N_K)` of a complete K-way array with 1-based indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct MultiIndexGrid {
    sizes: Vec<usize>,
}

impl MultiIndexGrid {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.len() > MAX_DIMS {
            return Err(Error::InvalidGrid(format!(
                "number of dimensions must be in 1..={MAX_DIMS}, got {}",
                sizes.len()
            )));
        }
        if let Some(k) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::InvalidGrid(format!("dimension {} has size 0", k + 1)));
        }
        if sizes.iter().any(|&s| s > u32::MAX as usize) {
            return Err(Error::InvalidGrid("dimension size exceeds u32".into()));
        }
        Ok(Self { sizes })
    }

    /// Square grid `n × … × n` with `k` dimensions.
    pub fn square(k: usize, n: usize) -> Result<Self> {
        Self::new(vec![n; k])
    }

    pub fn k_dims(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// `n = min_k N_k`, the rate-determining sample size.
    pub fn n(&self) -> usize {
        *self.sizes.iter().min().expect("grid has at least one dimension")
    }

    pub fn cell_count(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Whether `index` (1-based) lies inside the grid.
    pub fn contains(&self, index: &[u32]) -> bool {
        index.len() == self.sizes.len()
            && index
                .iter()
                .zip(&self.sizes)
                .all(|(&i, &s)| i >= 1 && (i as usize) <= s)
    }

    /// Position of `index` in lexicographic (last coordinate fastest) order.
    pub fn linear_index(&self, index: &[u32]) -> Option<usize> {
        if !self.contains(index) {
            return None;
        }
        let mut pos = 0usize;
        for (&i, &s) in index.iter().zip(&self.sizes) {
            pos = pos * s + (i as usize - 1);
        }
        Some(pos)
    }

    /// All cells in lexicographic order.
    pub fn cells(&self) -> Cells {
        Cells {
            sizes: self.sizes.clone(),
            next: Some(vec![1; self.sizes.len()]),
        }
    }

    /// Indices `i ⊙ e` of the projected index set `I_{N,e}`, lexicographic.
    /// Coordinates outside the support of `pattern` are zero.
    pub fn projected_cells(&self, pattern: Pattern) -> impl Iterator<Item = Vec<u32>> {
        let k = self.k_dims();
        let sizes: Vec<usize> = (0..k)
            .map(|d| if pattern.contains(d) { self.sizes[d] } else { 1 })
            .collect();
        Cells {
            sizes,
            next: Some(vec![1; k]),
        }
        .map(move |mut idx| {
            for (d, v) in idx.iter_mut().enumerate() {
                if !pattern.contains(d) {
                    *v = 0;
                }
            }
            idx
        })
    }
}

impl TryFrom<Vec<usize>> for MultiIndexGrid {
    type Error = Error;

    fn try_from(sizes: Vec<usize>) -> Result<Self> {
        Self::new(sizes)
    }
}

impl From<MultiIndexGrid> for Vec<usize> {
    fn from(grid: MultiIndexGrid) -> Self {
        grid.sizes
    }
}

impl fmt::Display for MultiIndexGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sizes.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// Lexicographic iterator over 1-based multi-indices.
pub struct Cells {
    sizes: Vec<usize>,
    next: Option<Vec<u32>>,
}

impl Iterator for Cells {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut d = succ.len();
        loop {
            if d == 0 {
                break;
            }
            d -= 1;
            if (succ[d] as usize) < self.sizes[d] {
                succ[d] += 1;
                self.next = Some(succ);
                break;
            }
            succ[d] = 1;
        }
        Some(current)
    }
}

/// A shock pattern `e ∈ {0,1}^K`; bit `k` is set when `e_{k+1} = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pattern {
    mask: u32,
    k_dims: u8,
}

impl Pattern {
    pub fn from_mask(mask: u32, k_dims: usize) -> Result<Self> {
        if k_dims == 0 || k_dims > MAX_DIMS {
            return Err(Error::InvalidKey(format!("pattern length {k_dims} out of range")));
        }
        if mask >> k_dims != 0 {
            return Err(Error::InvalidKey(format!(
                "mask {mask:#b} has bits beyond dimension {k_dims}"
            )));
        }
        Ok(Self {
            mask,
            k_dims: k_dims as u8,
        })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mask = bits
            .iter()
            .enumerate()
            .fold(0u32, |m, (k, &b)| if b { m | (1 << k) } else { m });
        Self::from_mask(mask, bits.len())
    }

    /// The unit pattern `e_k` (0-based `k`).
    pub fn unit(k: usize, k_dims: usize) -> Self {
        assert!(k < k_dims && k_dims <= MAX_DIMS);
        Self {
            mask: 1 << k,
            k_dims: k_dims as u8,
        }
    }

    /// The full pattern `(1, …, 1)`.
    pub fn full(k_dims: usize) -> Self {
        assert!((1..=MAX_DIMS).contains(&k_dims));
        Self {
            mask: (1u32 << k_dims) - 1,
            k_dims: k_dims as u8,
        }
    }

    pub fn mask(self) -> u32 {
        self.mask
    }

    pub fn k_dims(self) -> usize {
        self.k_dims as usize
    }

    pub fn is_zero(self) -> bool {
        self.mask == 0
    }

    /// `|e|`, the number of nonzero entries.
    pub fn order(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn contains(self, k: usize) -> bool {
        self.mask >> k & 1 == 1
    }

    /// Coordinate-wise `self ≤ other`.
    pub fn is_sub_of(self, other: Pattern) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn bits(self) -> Vec<bool> {
        (0..self.k_dims()).map(|k| self.contains(k)).collect()
    }

    /// Nonzero patterns of dimension `k_dims`, ordered by `|e|` then
    /// lexicographically on `(e_1, …, e_K)`.
    pub fn all_nonzero(k_dims: usize) -> Vec<Pattern> {
        assert!((1..=MAX_DIMS).contains(&k_dims));
        let mut out: Vec<Pattern> = (1..(1u32 << k_dims))
            .map(|mask| Pattern {
                mask,
                k_dims: k_dims as u8,
            })
            .collect();
        out.sort_by(|a, b| a.order().cmp(&b.order()).then_with(|| a.bits().cmp(&b.bits())));
        out
    }

    /// Nonzero sub-patterns `e' ≤ self`, in [`Pattern::all_nonzero`] order.
    pub fn sub_patterns(self) -> Vec<Pattern> {
        Self::all_nonzero(self.k_dims())
            .into_iter()
            .filter(|p| p.is_sub_of(self))
            .collect()
    }

    /// Projects a multi-index onto the pattern: `i ⊙ e`.
    pub fn project(self, index: &[u32]) -> Vec<u32> {
        index
            .iter()
            .enumerate()
            .map(|(k, &i)| if self.contains(k) { i } else { 0 })
            .collect()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self
            .bits()
            .into_iter()
            .map(|b| if b { "1" } else { "0" })
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Full key of one latent uniform.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatternKey {
    pub pattern: Pattern,
    pub projected_index: Vec<u32>,
    pub channel: String,
}

impl PatternKey {
    /// Key for the latent of `index` under `pattern`, projecting the index.
    pub fn project(pattern: Pattern, index: &[u32], channel: &str) -> Self {
        Self {
            pattern,
            projected_index: pattern.project(index),
            channel: channel.to_owned(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.pattern.is_zero() {
            return Err(Error::InvalidKey("pattern must have a nonzero entry".into()));
        }
        if self.projected_index.len() != self.pattern.k_dims() {
            return Err(Error::InvalidKey(format!(
                "projected index has {} coordinates, pattern has {}",
                self.projected_index.len(),
                self.pattern.k_dims()
            )));
        }
        for (k, &i) in self.projected_index.iter().enumerate() {
            if self.pattern.contains(k) != (i != 0) {
                return Err(Error::InvalidKey(format!(
                    "coordinate {} of the projected index is {i} but pattern entry is {}",
                    k + 1,
                    u8::from(self.pattern.contains(k))
                )));
            }
        }
        Ok(())
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub(crate) fn absorb(h: u64, v: u64) -> u64 {
    mix64(h ^ v).wrapping_add(GOLDEN)
}

#[inline]
fn channel_hash(channel: &str) -> u64 {
    // FNV-1a
    channel
        .bytes()
        .fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3))
}

/// Maps 64 random bits to the open interval (0, 1).
#[inline]
pub(crate) fn open_unit(h: u64) -> f64 {
    ((h >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Derives a child seed from a parent seed and a list of tags.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    let mut h = mix64(seed ^ 0x5EED_0F5E_ED00_0001);
    h = absorb(h, tags.len() as u64);
    for &t in tags {
        h = absorb(h, t);
    }
    mix64(h)
}

/// Stateless source of latent uniforms keyed by [`PatternKey`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatentStore {
    seed: u64,
}

impl LatentStore {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The uniform `U_{i⊙e}` on `key.channel`, strictly inside (0, 1).
    pub fn latent(&self, key: &PatternKey) -> Result<f64> {
        key.validate()?;
        Ok(self.uniform(key.pattern, &key.projected_index, &key.channel))
    }

    /// Unchecked hot path of [`LatentStore::latent`]; `projected` must
    /// already be projected onto `pattern`.
    #[inline]
    pub fn uniform(&self, pattern: Pattern, projected: &[u32], channel: &str) -> f64 {
        debug_assert!(!pattern.is_zero());
        let mut h = mix64(self.seed ^ 0xA5A5_5A5A_0F0F_F0F0);
        h = absorb(h, (pattern.mask() as u64) | ((pattern.k_dims() as u64) << 32));
        for &i in projected {
            h = absorb(h, i as u64);
        }
        h = absorb(h, channel_hash(channel));
        open_unit(mix64(h))
    }

    /// Accessor for the latents of one cell.
    pub fn cell<'a>(&'a self, index: &'a [u32]) -> CellView<'a> {
        CellView { store: self, index }
    }
}

/// Read access to the latents of a single cell: `U_{i⊙e}` for every
/// nonzero `e` and channel.
pub trait CellLatents {
    fn k_dims(&self) -> usize;
    fn uniform(&self, pattern: Pattern, channel: &str) -> f64;
}

/// [`CellLatents`] for cell `index` of a [`LatentStore`].
#[derive(Clone, Copy, Debug)]
pub struct CellView<'a> {
    store: &'a LatentStore,
    index: &'a [u32],
}

impl CellView<'_> {
    pub fn index(&self) -> &[u32] {
        self.index
    }
}

impl CellLatents for CellView<'_> {
    fn k_dims(&self) -> usize {
        self.index.len()
    }

    #[inline]
    fn uniform(&self, pattern: Pattern, channel: &str) -> f64 {
        debug_assert_eq!(pattern.k_dims(), self.index.len());
        let mut buf = [0u32; MAX_DIMS];
        let k = self.index.len();
        for (d, slot) in buf[..k].iter_mut().enumerate() {
            if pattern.contains(d) {
                *slot = self.index[d];
            }
        }
        self.store.uniform(pattern, &buf[..k], channel)
    }
}

/// Generates the dataset `W_i = τ({U_{i⊙e}})` for every cell of `grid`.
pub fn materialize(dgp: &DgpSpec, grid: &MultiIndexGrid, seed: u64) -> Result<Dataset> {
    dgp.check_grid(grid)?;
    let store = LatentStore::new(seed);
    let mut records = Vec::with_capacity(grid.cell_count());
    for index in grid.cells() {
        let obs = evaluate_tau(dgp, &store.cell(&index))?;
        records.push((index, obs));
    }
    let mut data = Dataset::from_records(grid.clone(), dgp.observable_dim(), records)?;
    data.attach_latents(store);
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_enumerates_every_cell_once() {
        let grid = MultiIndexGrid::new(vec![2, 3, 2]).unwrap();
        let cells: Vec<Vec<u32>> = grid.cells().collect();
        assert_eq!(cells.len(), 12);
        assert_eq!(cells[0], vec![1, 1, 1]);
        assert_eq!(cells[1], vec![1, 1, 2]);
        assert_eq!(cells[11], vec![2, 3, 2]);
        for (pos, c) in cells.iter().enumerate() {
            assert_eq!(grid.linear_index(c), Some(pos));
        }
        assert_eq!(grid.n(), 2);
    }

    #[test]
    fn grid_rejects_zero_size() {
        assert!(MultiIndexGrid::new(vec![3, 0]).is_err());
        assert!(MultiIndexGrid::new(vec![]).is_err());
    }

    #[test]
    fn projected_cells_zero_outside_support() {
        let grid = MultiIndexGrid::new(vec![3, 2]).unwrap();
        let row = Pattern::unit(0, 2);
        let got: Vec<Vec<u32>> = grid.projected_cells(row).collect();
        assert_eq!(got, vec![vec![1, 0], vec![2, 0], vec![3, 0]]);
        assert_eq!(grid.projected_cells(Pattern::full(2)).count(), 6);
    }

    #[test]
    fn pattern_order_is_by_weight_then_lexicographic() {
        let p = Pattern::all_nonzero(3);
        let shown: Vec<String> = p.iter().map(|p| p.to_string()).collect();
        assert_eq!(
            shown,
            vec!["(0,0,1)", "(0,1,0)", "(1,0,0)", "(0,1,1)", "(1,0,1)", "(1,1,0)", "(1,1,1)"]
        );
    }

    #[test]
    fn latent_is_deterministic_and_open() {
        let store = LatentStore::new(7);
        let key = PatternKey::project(Pattern::unit(0, 2), &[3, 5], "x1");
        assert_eq!(key.projected_index, vec![3, 0]);
        let a = store.latent(&key).unwrap();
        let b = store.latent(&key).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(a > 0.0 && a < 1.0);
    }

    #[test]
    fn channels_give_different_values() {
        let store = LatentStore::new(7);
        let a = store
            .latent(&PatternKey::project(Pattern::unit(0, 2), &[3, 0], "x1"))
            .unwrap();
        let b = store
            .latent(&PatternKey::project(Pattern::unit(0, 2), &[3, 0], "x2"))
            .unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn zero_pattern_rejected() {
        let store = LatentStore::new(1);
        let key = PatternKey {
            pattern: Pattern::from_mask(0, 2).unwrap(),
            projected_index: vec![0, 0],
            channel: "x1".into(),
        };
        assert!(matches!(store.latent(&key), Err(Error::InvalidKey(_))));
    }

    #[test]
    fn unprojected_index_rejected() {
        let key = PatternKey {
            pattern: Pattern::unit(0, 2),
            projected_index: vec![3, 4],
            channel: "x1".into(),
        };
        assert!(key.validate().is_err());
    }

    #[test]
    fn open_unit_bounds() {
        assert!(open_unit(0) > 0.0);
        assert!(open_unit(u64::MAX) < 1.0);
    }

    #[test]
    fn cell_view_matches_keyed_latent() {
        let store = LatentStore::new(99);
        let idx = [4u32, 9];
        let view = store.cell(&idx);
        for p in Pattern::all_nonzero(2) {
            let direct = store.latent(&PatternKey::project(p, &idx, "e")).unwrap();
            assert_eq!(view.uniform(p, "e").to_bits(), direct.to_bits());
        }
    }
}
