use std::f64::consts::TAU;

use maxscore_core::{
    argmax_enumerate, argmax_sweep_2d, objective, ConstraintSet, Dataset, Direction,
    MultiIndexGrid, Observation, Optimizer,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dataset(points: &[(i8, Vec<f64>)]) -> Dataset {
    let grid = MultiIndexGrid::new(vec![points.len()]).unwrap();
    let d = points[0].1.len();
    let recs = points
        .iter()
        .enumerate()
        .map(|(i, (y, x))| (vec![i as u32 + 1], Observation::new(*y, x.clone()).unwrap()))
        .collect();
    Dataset::from_records(grid, d, recs).unwrap()
}

fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Dataset {
    let pts: Vec<(i8, Vec<f64>)> = (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y = if rng.random_bool(0.5) { 1 } else { -1 };
            (y, x)
        })
        .collect();
    dataset(&pts)
}

/// Brute-force score straight from the definition.
fn brute(points: &Dataset, b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..points.len() {
        let xb: f64 = points.x(i).iter().zip(b).map(|(a, c)| a * c).sum();
        if xb >= 0.0 {
            s += f64::from(points.y(i));
        }
    }
    s / points.len() as f64
}

#[test]
fn sweep_dominates_angle_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..30 {
        let n = rng.random_range(1..=50);
        let data = random_dataset(&mut rng, n, 2);
        let est = argmax_sweep_2d(&data, &ConstraintSet::FullSphere, None).unwrap();
        let grid_max = (0..20_000)
            .map(|k| {
                let phi = TAU * k as f64 / 20_000.0;
                brute(&data, &[phi.cos(), phi.sin()])
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(est.objective >= grid_max);
        assert_eq!(est.objective, objective(&data, &est.beta_hat, None).unwrap());
    }
}

#[test]
fn enumerate_agrees_with_sweep_in_two_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let hemi = ConstraintSet::Hemisphere {
        reference: Direction::normalize(&[1.0, 1.0]).unwrap(),
    };
    for _ in 0..50 {
        let n = rng.random_range(1..=40);
        let data = random_dataset(&mut rng, n, 2);
        for c in [ConstraintSet::FullSphere, hemi.clone()] {
            let s = argmax_sweep_2d(&data, &c, None).unwrap();
            let e = argmax_enumerate(&data, &c, None).unwrap();
            assert_eq!(s.objective, e.objective);
        }
    }
}

#[test]
fn enumerate_dominates_random_directions_in_three_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let n = rng.random_range(1..=20);
        let data = random_dataset(&mut rng, n, 3);
        let est = argmax_enumerate(&data, &ConstraintSet::FullSphere, None).unwrap();
        for _ in 0..20_000 {
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let Ok(b) = Direction::normalize(&v) else { continue };
            assert!(est.objective >= brute(&data, b.as_slice()));
        }
    }
}

#[test]
fn weighted_sweep_matches_weighted_enumerate() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..30 {
        let n = rng.random_range(2..=30);
        let data = random_dataset(&mut rng, n, 2);
        let w: Vec<f64> = (0..n).map(|_| -(rng.random::<f64>()).ln()).collect();
        let s = Optimizer::Sweep
            .estimate(&data, &ConstraintSet::FullSphere, Some(&w))
            .unwrap();
        let e = Optimizer::Enumerate
            .estimate(&data, &ConstraintSet::FullSphere, Some(&w))
            .unwrap();
        assert!((s.objective - e.objective).abs() < 1e-12);
    }
}

fn points_2d() -> impl Strategy<Value = Vec<(i8, Vec<f64>)>> {
    prop::collection::vec(
        (prop::bool::ANY, -5.0f64..5.0, -5.0f64..5.0)
            .prop_map(|(pos, a, b)| (if pos { 1 } else { -1 }, vec![a, b])),
        1..25,
    )
}

proptest! {
    #[test]
    fn objective_is_scale_invariant(pts in points_2d(), c in 0.01f64..100.0, phi in 0.0f64..TAU) {
        let data = dataset(&pts);
        let scaled: Vec<_> = pts.iter().map(|(y, x)| (*y, x.iter().map(|v| v * c).collect())).collect();
        let scaled = dataset(&scaled);
        let b = Direction::from_angle(phi);
        // Sign of x'b is preserved by positive scaling unless the product
        // underflows; the range used here keeps it exact away from zero.
        let q1 = objective(&data, &b, None).unwrap();
        let q2 = objective(&scaled, &b, None).unwrap();
        let near_zero = (0..data.len()).any(|i| b.dot(data.x(i)).abs() < 1e-9);
        prop_assume!(!near_zero);
        prop_assert_eq!(q1, q2);
    }

    #[test]
    fn sweep_is_globally_optimal(pts in points_2d(), phi in 0.0f64..TAU) {
        let data = dataset(&pts);
        let est = argmax_sweep_2d(&data, &ConstraintSet::FullSphere, None).unwrap();
        let q = objective(&data, &Direction::from_angle(phi), None).unwrap();
        prop_assert!(q <= est.objective);
        prop_assert!((-1.0..=1.0).contains(&est.objective));
    }

    #[test]
    fn rotation_moves_the_optimal_value_along(pts in points_2d(), rot in 0.0f64..TAU) {
        let data = dataset(&pts);
        let (c, s) = (rot.cos(), rot.sin());
        let rotated: Vec<_> = pts.iter().map(|(y, x)| (*y, vec![c * x[0] - s * x[1], s * x[0] + c * x[1]])).collect();
        let rdata = dataset(&rotated);
        let a = argmax_sweep_2d(&data, &ConstraintSet::FullSphere, None).unwrap();
        let b = argmax_sweep_2d(&rdata, &ConstraintSet::FullSphere, None).unwrap();
        prop_assert!((a.objective - b.objective).abs() < 1e-12);
        // The rotated optimum is optimal for the rotated data.
        let phi = a.beta_hat.angle() + rot;
        let q = objective(&rdata, &Direction::from_angle(phi), None).unwrap();
        let near_zero = (0..data.len()).any(|i| a.beta_hat.dot(data.x(i)).abs() < 1e-9);
        prop_assume!(!near_zero);
        prop_assert_eq!(q, b.objective);
    }

    #[test]
    fn estimate_objective_is_recomputable(pts in points_2d()) {
        let data = dataset(&pts);
        for opt in [Optimizer::Sweep, Optimizer::Enumerate] {
            let est = opt.estimate(&data, &ConstraintSet::FullSphere, None).unwrap();
            prop_assert_eq!(est.objective, objective(&data, &est.beta_hat, None).unwrap());
        }
    }
}
