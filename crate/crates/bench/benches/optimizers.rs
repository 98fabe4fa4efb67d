use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use maxscore_bench::square_dataset;
use maxscore_core::{
    argmax_enumerate, argmax_sweep_2d, bootstrap_estimate, BootstrapConfig, ConstraintSet,
    DgpVariant, Direction, Optimizer, WeightDistribution, WeightSpec,
};
use std::hint::black_box;

fn sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_2d");
    for n in [25, 50, 100, 200] {
        let data = square_dataset(DgpVariant::AddShock, n, 2, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n * n), &data, |b, data| {
            b.iter(|| argmax_sweep_2d(black_box(data), &ConstraintSet::FullSphere, None).unwrap())
        });
    }
    group.finish();
}

fn enumerate(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_3d");
    group.sample_size(10);
    for n in [4, 6, 8] {
        let data = square_dataset(DgpVariant::AddShock, n, 3, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n * n), &data, |b, data| {
            b.iter(|| argmax_enumerate(black_box(data), &ConstraintSet::FullSphere, None).unwrap())
        });
    }
    group.finish();
}

fn bootstrap(c: &mut Criterion) {
    let mut group = c.benchmark_group("bootstrap");
    group.sample_size(10);
    let data = square_dataset(DgpVariant::AddShock, 50, 2, 1);
    let config = BootstrapConfig {
        weights: WeightSpec {
            distribution: WeightDistribution::Exponential,
            replications: 100,
        },
        optimizer: Optimizer::Auto,
        constraint: ConstraintSet::FullSphere,
        reference: Some(Direction::normalize(&[1.0, 1.0]).unwrap()),
        levels: vec![0.9, 0.95],
        seed: 1,
    };
    group.bench_function("n50_b100", |b| {
        b.iter(|| bootstrap_estimate(black_box(&data), &config).unwrap())
    });
    group.finish();
}

criterion_group!(benches, sweep, enumerate, bootstrap);
criterion_main!(benches);
