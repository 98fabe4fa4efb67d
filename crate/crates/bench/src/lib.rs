//! Fixtures shared by the benchmarks.

use maxscore_core::{materialize, Dataset, DgpSpec, DgpVariant, MultiIndexGrid};

/// A complete `n × n` draw from `variant` with `d` covariates.
pub fn square_dataset(variant: DgpVariant, n: usize, d: usize, seed: u64) -> Dataset {
    let spec = DgpSpec::with_dim(variant, d).expect("supported dimension");
    let grid = MultiIndexGrid::square(2, n).expect("positive size");
    materialize(&spec, &grid, seed).expect("materialize")
}
