use std::f64::consts::PI;

use maxscore_core::oracle::{oracle_delta, oracle_hessian, oracle_variance, LevelShocks, Quadrature};
use maxscore_core::stats::normal_cdf;
use maxscore_core::{DgpSpec, DgpVariant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Closed form of the additive design's influence term for β₀ = (1,1)/√2.
fn delta_closed_form(u: &LevelShocks) -> f64 {
    let v = [-1.0 / SQRT2, 1.0 / SQRT2];
    let b = [1.0 / SQRT2, 1.0 / SQRT2];
    let s = v[0] * u.x[0] + v[1] * u.x[1];
    let w = b[0] * u.x[0] + b[1] * u.x[1];
    let m = 2.0 * normal_cdf(-u.e / SQRT2) - 1.0;
    m * s * (-w * w / 4.0).exp() / (2.0 * PI.sqrt())
}

fn shocks(x1: f64, x2: f64, e: f64) -> LevelShocks {
    LevelShocks {
        x: vec![x1, x2],
        e,
        s: 0.0,
    }
}

#[test]
fn delta_matches_closed_form() {
    let spec = DgpSpec::new(DgpVariant::AddShock);
    for u in [shocks(0.3, -1.1, 0.8), shocks(-2.0, 0.5, -1.4), shocks(1.0, 1.5, 0.2)] {
        let got = oracle_delta(&spec, 0, &u, Quadrature::default()).unwrap();
        let want = delta_closed_form(&u);
        assert!((got.value - want).abs() < 1e-13, "{} vs {want}", got.value);
        assert!(got.refinement_error <= 1e-6 * got.value.abs());
    }
}

#[test]
fn hessians_match_closed_forms() {
    let q = Quadrature::default();
    let add = oracle_hessian(&DgpSpec::new(DgpVariant::AddShock), q).unwrap().value;
    let iid = oracle_hessian(&DgpSpec::new(DgpVariant::Iid), q).unwrap().value;
    assert!((add - 1.0 / PI).abs() < 1e-13);
    assert!((iid - 1.0 / PI).abs() < 1e-13);
    // E[1/(1 + Exp(1))] = e·E₁(1).
    let e_inv_scale = 0.596_347_362_323_194_1;
    let mult = oracle_hessian(&DgpSpec::new(DgpVariant::MultScale), q).unwrap().value;
    assert!((mult - 3f64.sqrt() / PI * e_inv_scale).abs() < 1e-9, "{mult}");
}

#[test]
fn delta_matches_thin_band_monte_carlo() {
    // Conditional on the row shocks, simulate the column and cell shocks and
    // average Y·1{|X'β₀| < h/2}·X'B₀/h.
    let spec = DgpSpec::new(DgpVariant::AddShock);
    let u = shocks(0.9, -0.4, 0.7);
    let oracle = oracle_delta(&spec, 0, &u, Quadrature::default()).unwrap().value;
    let h = 0.01;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let draws = 4_000_000;
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..draws {
        let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
        let x1 = u.x[0] + z() + z();
        let x2 = u.x[1] + z() + z();
        let eps = u.e + z() + z();
        let index = (x1 + x2) / SQRT2;
        let mut val = 0.0;
        if index.abs() < h / 2.0 {
            let y = if index - eps >= 0.0 { 1.0 } else { -1.0 };
            val = y * (x2 - x1) / SQRT2 / h;
        }
        sum += val;
        sum2 += val * val;
    }
    let n = draws as f64;
    let mean = sum / n;
    let se = ((sum2 / n - mean * mean) / n).sqrt();
    assert!((mean - oracle).abs() < 3.0 * se, "band {mean} ± {se} vs {oracle}");
}

#[test]
fn delta_matches_nested_monte_carlo() {
    // ∫ m p(tv) t dt = e^{−w²/4}/√(4π) · E[T·m], T ~ N(s, 2), with m itself
    // estimated by an inner simulation of the error.
    let spec = DgpSpec::new(DgpVariant::AddShock);
    let u = shocks(-0.6, 1.3, -0.9);
    let oracle = oracle_delta(&spec, 0, &u, Quadrature::default()).unwrap().value;
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let s = (u.x[1] - u.x[0]) / SQRT2;
    let w = (u.x[0] + u.x[1]) / SQRT2;
    let scale = (-w * w / 4.0).exp() / (4.0 * PI).sqrt();
    let (outer, inner) = (20_000, 50);
    let mut vals = Vec::with_capacity(outer);
    for _ in 0..outer {
        let z: f64 = StandardNormal.sample(&mut rng);
        let t = s + SQRT2 * z;
        let mut m = 0.0;
        for _ in 0..inner {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            m += if 0.0 - (u.e + a + b) >= 0.0 { 1.0 } else { -1.0 };
        }
        vals.push(scale * t * m / inner as f64);
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!((mean - oracle).abs() < 3.0 * se, "nested {mean} ± {se} vs {oracle}");
}

#[test]
fn variance_matches_closed_form() {
    let spec = DgpSpec::new(DgpVariant::AddShock);
    let o = oracle_variance(&spec, &[1.0, 1.0], 10_000, 3, Quadrature::default()).unwrap();
    let second = (2.0 * (1.0f64 / 3.0).asin() / PI) * (1.0 / SQRT2) / (4.0 * PI);
    let omega = 2.0 * second;
    let v = omega * PI * PI;
    assert!(o.v[0][0] > 0.0);
    assert!(o.v_se < 0.05 * o.v[0][0]);
    assert!((o.v[0][0] - v).abs() < 4.0 * o.v_se, "{} ± {} vs {v}", o.v[0][0], o.v_se);
    let h = o.h[0][0];
    assert!((o.v[0][0] - o.omega[0][0] / (h * h)).abs() <= 1e-8 * o.v[0][0]);
}

#[test]
fn lambda_is_linear() {
    let spec = DgpSpec::new(DgpVariant::AddShock);
    let q = Quadrature { nodes: 256, radius: 8.0 };
    let both = oracle_variance(&spec, &[1.0, 1.0], 500, 9, q).unwrap();
    let first = oracle_variance(&spec, &[1.0, 0.0], 500, 9, q).unwrap();
    assert_eq!(first.omega[0][0], both.delta_second_moment[0]);
    assert!(first.omega[0][0] < both.omega[0][0]);
}

#[test]
fn multiplicative_design_is_degenerate() {
    let spec = DgpSpec::new(DgpVariant::MultScale);
    let o = oracle_variance(&spec, &[1.0, 1.0], 1_000, 5, Quadrature::default()).unwrap();
    assert_eq!(o.v[0][0], 0.0);
    assert_eq!(o.omega[0][0], 0.0);
}
