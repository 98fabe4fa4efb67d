use std::cell::RefCell;
use std::collections::BTreeSet;

use maxscore_core::arrays::CellLatents;
use maxscore_core::stats::{ks_two_sample, normal_quantile};
use maxscore_core::{
    evaluate_tau, materialize, DgpSpec, DgpVariant, LatentStore, MultiIndexGrid, Observation,
    Pattern,
};
use rayon::prelude::*;

/// Keys `(pattern, projected index, channel)` read while evaluating a cell.
struct Recording<'a> {
    store: &'a LatentStore,
    index: Vec<u32>,
    seen: RefCell<BTreeSet<(u32, Vec<u32>, String)>>,
}

impl CellLatents for Recording<'_> {
    fn k_dims(&self) -> usize {
        self.index.len()
    }

    fn uniform(&self, pattern: Pattern, channel: &str) -> f64 {
        let projected = pattern.project(&self.index);
        self.seen
            .borrow_mut()
            .insert((pattern.mask(), projected.clone(), channel.to_owned()));
        self.store.uniform(pattern, &projected, channel)
    }
}

fn keys_of(spec: &DgpSpec, store: &LatentStore, index: &[u32]) -> BTreeSet<(u32, Vec<u32>, String)> {
    let rec = Recording {
        store,
        index: index.to_vec(),
        seen: RefCell::new(BTreeSet::new()),
    };
    evaluate_tau(spec, &rec).unwrap();
    rec.seen.into_inner()
}

fn continuous() -> [DgpVariant; 3] {
    [DgpVariant::MultScale, DgpVariant::AddShock, DgpVariant::Iid]
}

#[test]
fn small_iid_grid_has_one_record_per_cell() {
    let spec = DgpSpec::new(DgpVariant::Iid);
    let data = materialize(&spec, &MultiIndexGrid::new(vec![2, 2]).unwrap(), 7).unwrap();
    assert_eq!(data.len(), 4);
    assert!(data.ys().iter().all(|&y| y == 1 || y == -1));
}

#[test]
fn materialization_is_reproducible_and_schedule_free() {
    for variant in DgpVariant::ALL {
        let spec = DgpSpec::new(variant);
        let grid = MultiIndexGrid::new(vec![9, 13]).unwrap();
        let a = materialize(&spec, &grid, 99).unwrap();
        let b = materialize(&spec, &grid, 99).unwrap();
        assert_eq!(a, b);
        let store = LatentStore::new(99);
        let cells: Vec<Vec<u32>> = grid.cells().collect();
        let parallel: Vec<Observation> = cells
            .par_iter()
            .rev()
            .map(|c| evaluate_tau(&spec, &store.cell(c)).unwrap())
            .collect();
        for (i, obs) in parallel.iter().rev().enumerate() {
            assert_eq!(obs, &a.observation(i));
        }
    }
}

#[test]
fn row_relabeling_permutes_records() {
    let spec = DgpSpec::new(DgpVariant::AddShock);
    let grid = MultiIndexGrid::new(vec![6, 4]).unwrap();
    let data = materialize(&spec, &grid, 3).unwrap();
    let perm = [4u32, 1, 6, 2, 5, 3];
    let store = LatentStore::new(3);
    let render = |o: &Observation| (o.y, o.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    let mut original: Vec<_> = (0..data.len()).map(|i| render(&data.observation(i))).collect();
    let mut relabeled: Vec<_> = grid
        .cells()
        .map(|c| {
            let moved = [perm[c[0] as usize - 1], c[1]];
            render(&evaluate_tau(&spec, &store.cell(&moved)).unwrap())
        })
        .collect();
    original.sort();
    relabeled.sort();
    assert_eq!(original, relabeled);
}

#[test]
fn cells_read_only_keys_projected_from_their_own_index() {
    let store = LatentStore::new(8);
    for variant in DgpVariant::ALL {
        let spec = DgpSpec::new(variant);
        let index = [3u32, 5];
        for (mask, projected, _) in keys_of(&spec, &store, &index) {
            let p = Pattern::from_mask(mask, 2).unwrap();
            assert_eq!(projected, p.project(&index));
        }
    }
}

#[test]
fn disjoint_blocks_share_no_keys() {
    let store = LatentStore::new(8);
    for variant in continuous() {
        let spec = DgpSpec::new(variant);
        let a = keys_of(&spec, &store, &[1, 1]);
        let b = keys_of(&spec, &store, &[2, 2]);
        assert!(a.is_disjoint(&b), "{variant}");
        let same_row = keys_of(&spec, &store, &[1, 2]);
        let shared = a.intersection(&same_row).count();
        if variant == DgpVariant::Iid {
            assert_eq!(shared, 0);
        } else {
            assert!(shared > 0);
        }
    }
}

#[test]
fn iid_design_reads_only_cell_keys() {
    let store = LatentStore::new(8);
    let keys = keys_of(&DgpSpec::new(DgpVariant::Iid), &store, &[4, 7]);
    assert!(keys.iter().all(|(mask, _, _)| *mask == 0b11));
}

#[test]
fn cells_share_their_marginal_law() {
    // Critical value of the two-sample KS statistic at 1%.
    let draws = 10_000usize;
    let critical = 1.628 * (2.0 / draws as f64).sqrt();
    for variant in continuous() {
        let spec = DgpSpec::new(variant);
        let x1_at = |cell: [u32; 2]| -> Vec<f64> {
            (0..draws as u64)
                .map(|s| evaluate_tau(&spec, &LatentStore::new(s).cell(&cell)).unwrap().x[0])
                .collect()
        };
        let d = ks_two_sample(&x1_at([1, 1]), &x1_at([2, 3]));
        assert!(d < critical, "{variant}: D = {d}");
    }
}

#[test]
fn additive_error_has_zero_median_given_covariate_sign() {
    // Diagonal cells share no index, so their records are independent.
    let spec = DgpSpec::new(DgpVariant::AddShock);
    let store = LatentStore::new(2024);
    let mut by_sign: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for i in 1..=200_000u32 {
        let index = [i, i];
        let cell = store.cell(&index);
        let z = |p: Pattern| normal_quantile(cell.uniform(p, "e"));
        let eps = z(Pattern::unit(0, 2)) + z(Pattern::unit(1, 2)) + z(Pattern::full(2));
        let x1 = evaluate_tau(&spec, &cell).unwrap().x[0];
        by_sign[usize::from(x1 >= 0.0)].push(eps);
    }
    for group in &mut by_sign {
        group.sort_by(f64::total_cmp);
        let median = group[group.len() / 2];
        assert!(median.abs() < 0.02, "median {median} over {} cells", group.len());
    }
}
