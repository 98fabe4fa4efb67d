//! Observed binary-choice records over a multi-index grid.

use serde::{Deserialize, Serialize};

use crate::arrays::{LatentStore, MultiIndexGrid};
use crate::error::{Error, Result};

/// One observation `W = (Y, X')'` with `Y ∈ {−1, +1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub y: i8,
    pub x: Vec<f64>,
}

impl Observation {
    pub fn new(y: i8, x: Vec<f64>) -> Result<Self> {
        if y != 1 && y != -1 {
            return Err(Error::InvalidDataset(format!("outcome must be -1 or 1, got {y}")));
        }
        if let Some(l) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!("covariate x{} is not finite", l + 1)));
        }
        Ok(Self { y, x })
    }
}

/// Records stored column-wise in index-lexicographic order.
///
/// The grid may be only partially filled (real data); simulated data is
/// always complete and carries the [`LatentStore`] it was generated from.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    grid: MultiIndexGrid,
    dim: usize,
    indices: Vec<u32>,
    y: Vec<i8>,
    x: Vec<f64>,
    latents: Option<LatentStore>,
}

impl Dataset {
    /// Builds a dataset, sorting records lexicographically by index.
    ///
    /// Rejects indices outside the grid, duplicate cells, covariate vectors
    /// of the wrong length, non-finite covariates and outcomes other than ±1.
    pub fn from_records(
        grid: MultiIndexGrid,
        dim: usize,
        mut records: Vec<(Vec<u32>, Observation)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDataset("covariate dimension must be positive".into()));
        }
        for (idx, obs) in &records {
            if !grid.contains(idx) {
                return Err(Error::InvalidDataset(format!(
                    "index {idx:?} outside grid {grid}"
                )));
            }
            if obs.x.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: obs.x.len(),
                });
            }
            if obs.y != 1 && obs.y != -1 {
                return Err(Error::InvalidDataset(format!("outcome {} at {idx:?}", obs.y)));
            }
            if obs.x.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!("non-finite covariate at {idx:?}")));
            }
        }
        records.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = records.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidDataset(format!("duplicate cell {:?}", w[0].0)));
        }
        let k = grid.k_dims();
        let mut indices = Vec::with_capacity(records.len() * k);
        let mut y = Vec::with_capacity(records.len());
        let mut x = Vec::with_capacity(records.len() * dim);
        for (idx, obs) in records {
            indices.extend_from_slice(&idx);
            y.push(obs.y);
            x.extend_from_slice(&obs.x);
        }
        Ok(Self {
            grid,
            dim,
            indices,
            y,
            x,
            latents: None,
        })
    }

    pub(crate) fn attach_latents(&mut self, store: LatentStore) {
        self.latents = Some(store);
    }

    pub fn grid(&self) -> &MultiIndexGrid {
        &self.grid
    }

    /// Covariate dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Whether every grid cell has a record.
    pub fn is_complete(&self) -> bool {
        self.len() == self.grid.cell_count()
    }

    pub fn fill_rate(&self) -> f64 {
        self.len() as f64 / self.grid.cell_count() as f64
    }

    pub fn latents(&self) -> Option<&LatentStore> {
        self.latents.as_ref()
    }

    pub fn index(&self, i: usize) -> &[u32] {
        let k = self.grid.k_dims();
        &self.indices[i * k..(i + 1) * k]
    }

    pub fn y(&self, i: usize) -> i8 {
        self.y[i]
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn ys(&self) -> &[i8] {
        &self.y
    }

    /// Flat row-major covariate matrix.
    pub fn xs(&self) -> &[f64] {
        &self.x
    }

    pub fn observation(&self, i: usize) -> Observation {
        Observation {
            y: self.y[i],
            x: self.x(i).to_vec(),
        }
    }

    /// Records whose position satisfies `keep`, on the same grid.
    pub fn filter(&self, mut keep: impl FnMut(usize) -> bool) -> Dataset {
        let k = self.grid.k_dims();
        let mut out = Dataset {
            grid: self.grid.clone(),
            dim: self.dim,
            indices: Vec::new(),
            y: Vec::new(),
            x: Vec::new(),
            latents: self.latents,
        };
        for i in 0..self.len() {
            if keep(i) {
                out.indices.extend_from_slice(&self.indices[i * k..(i + 1) * k]);
                out.y.push(self.y[i]);
                out.x.extend_from_slice(self.x(i));
            }
        }
        out
    }

    /// Same records with every covariate vector transformed by `f`.
    pub fn map_covariates(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Dataset> {
        let mut x = Vec::with_capacity(self.x.len());
        for i in 0..self.len() {
            let v = f(self.x(i));
            if v.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: v.len(),
                });
            }
            x.extend(v);
        }
        Ok(Dataset { x, ..self.clone() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(y: i8, x: &[f64]) -> Observation {
        Observation::new(y, x.to_vec()).unwrap()
    }

    #[test]
    fn records_are_sorted_lexicographically() {
        let grid = MultiIndexGrid::new(vec![2, 2]).unwrap();
        let data = Dataset::from_records(
            grid,
            1,
            vec![
                (vec![2, 1], obs(1, &[3.0])),
                (vec![1, 2], obs(-1, &[2.0])),
                (vec![1, 1], obs(1, &[1.0])),
            ],
        )
        .unwrap();
        assert_eq!(data.index(0), &[1, 1]);
        assert_eq!(data.index(1), &[1, 2]);
        assert_eq!(data.x(2), &[3.0]);
        assert!(!data.is_complete());
        assert!((data.fill_rate() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn duplicate_cells_rejected() {
        let grid = MultiIndexGrid::new(vec![2, 2]).unwrap();
        let err = Dataset::from_records(
            grid,
            1,
            vec![(vec![1, 1], obs(1, &[1.0])), (vec![1, 1], obs(-1, &[2.0]))],
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate"));
    }

    #[test]
    fn bad_outcome_and_nan_rejected() {
        assert!(Observation::new(0, vec![1.0]).is_err());
        assert!(Observation::new(1, vec![f64::NAN]).is_err());
    }
}
