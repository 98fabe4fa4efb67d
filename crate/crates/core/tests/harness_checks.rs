use maxscore_core::harness::normality_from_draws;
use maxscore_core::stats::{ks_p_value, ks_statistic, normal_cdf};
use maxscore_core::{
    run_coverage_study, run_normality_study, run_rate_study, BootstrapSettings, DgpVariant,
    ExperimentConfig, Optimizer, WeightDistribution,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn config(dgp: DgpVariant, sizes: Vec<usize>, replications: usize) -> ExperimentConfig {
    ExperimentConfig {
        dgp,
        sizes,
        replications,
        seed: 42,
        optimizer: Optimizer::Auto,
        bootstrap: None,
    }
}

#[test]
fn rate_study_reports_decreasing_errors() {
    let r = run_rate_study(&config(DgpVariant::AddShock, vec![10, 20, 40], 60)).unwrap();
    assert_eq!(r.rows.len(), 3);
    for pair in r.rows.windows(2) {
        assert!(
            pair[1].rmse_theta <= pair[0].rmse_theta + 2.0 * (pair[0].rmse_theta_se + pair[1].rmse_theta_se)
        );
    }
    for row in &r.rows {
        assert_eq!(row.replications + row.failed, 60);
        assert!(row.rmse_theta >= 0.0 && row.rmse_angle >= 0.0);
    }
    assert!(r.fit.slope < 0.0 && r.fit.slope_se > 0.0);
    assert!((r.fit_cells.slope - r.fit.slope / 2.0).abs() < 1e-12);
}

#[test]
fn studies_do_not_depend_on_thread_count() {
    let c = config(DgpVariant::Iid, vec![8, 12, 16], 50);
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| serde_json::to_string(&run_rate_study(&c).unwrap()).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn normality_p_values_are_not_anticonservative_under_the_null() {
    // Standardizing by the sample standard deviation makes the test
    // conservative, so rejections can only be rarer than nominal.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let runs = 400;
    let p: Vec<f64> = (0..runs)
        .map(|_| {
            let draws: Vec<f64> = (0..300).map(|_| StandardNormal.sample(&mut rng)).collect();
            normality_from_draws(DgpVariant::AddShock, 1, draws, 0).ks_p_value.unwrap()
        })
        .collect();
    assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
    let rejections = p.iter().filter(|&&v| v < 0.05).count() as f64 / runs as f64;
    let se = (0.05f64 * 0.95 / runs as f64).sqrt();
    assert!(rejections < 0.05 + 2.0 * se, "rejection rate {rejections}");
}

#[test]
fn known_scale_p_values_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let runs = 400;
    let p: Vec<f64> = (0..runs)
        .map(|_| {
            let draws: Vec<f64> = (0..300).map(|_| StandardNormal.sample(&mut rng)).collect();
            ks_p_value(draws.len(), ks_statistic(&draws, normal_cdf))
        })
        .collect();
    let d = ks_statistic(&p, |u| u.clamp(0.0, 1.0));
    assert!(ks_p_value(runs, d) > 0.01, "D = {d}");
}

#[test]
fn normality_study_standardizes_by_its_own_spread() {
    let r = run_normality_study(&config(DgpVariant::AddShock, vec![12], 300)).unwrap();
    assert_eq!(r.scaled_draws.len() + r.failed, 300);
    assert!(!r.degenerate);
    assert_eq!(r.qq.len(), r.scaled_draws.len());
    assert!(r.qq.windows(2).all(|w| w[0].sample <= w[1].sample));
    let p = r.ks_p_value.unwrap();
    assert!((0.0..=1.0).contains(&p));
}

#[test]
fn unit_bootstrap_weights_never_cover() {
    let mut c = config(DgpVariant::AddShock, vec![10], 200);
    c.bootstrap = Some(BootstrapSettings {
        distribution: WeightDistribution::Ones,
        replications: 1,
        levels: vec![0.9],
    });
    let r = run_coverage_study(&c).unwrap();
    assert_eq!(r.rows[0].coverage, 0.0);
    assert_eq!(r.rows[0].mean_length, 0.0);
}

#[test]
fn preconditions_are_enforced() {
    assert!(run_normality_study(&config(DgpVariant::AddShock, vec![12], 100)).is_err());
    assert!(run_normality_study(&config(DgpVariant::AddShock, vec![12, 24], 300)).is_err());
    let mut c = config(DgpVariant::AddShock, vec![10], 100);
    c.bootstrap = Some(BootstrapSettings {
        distribution: WeightDistribution::Exponential,
        replications: 10,
        levels: vec![0.9],
    });
    assert!(run_coverage_study(&c).is_err());
    assert!(run_rate_study(&config(DgpVariant::DiscreteTest, vec![4, 8, 16], 50)).is_err());
}
