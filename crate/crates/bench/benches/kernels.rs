use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use liftlab::linalg::expm;
use liftlab::rng::chain_rng;
use liftlab::samplers::bps_trajectory;
use liftlab::spectral::{assemble_galerkin, GalerkinProcess};
use liftlab::{PhaseState, Potential};
use nalgebra::DMatrix;

fn bench_expm(c: &mut Criterion) {
    let mut group = c.benchmark_group("expm");
    for n in [8usize, 32, 128] {
        let a = DMatrix::from_fn(n, n, |i, j| if i == j { -1.0 } else { 1.0 / (1.0 + (i + 2 * j) as f64) });
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| b.iter(|| expm(black_box(a)).unwrap()));
    }
    group.finish();
}

fn bench_galerkin(c: &mut Criterion) {
    let pot = Potential::double_well(0.5).unwrap();
    let mut group = c.benchmark_group("galerkin_assembly");
    group.sample_size(10);
    for degree in [8usize, 16, 24] {
        group.bench_with_input(BenchmarkId::from_parameter(degree), &degree, |b, &d| {
            b.iter(|| assemble_galerkin(GalerkinProcess::Langevin, &pot, 1.0, black_box(d)).unwrap())
        });
    }
    group.finish();
}

fn bench_bps(c: &mut Criterion) {
    let mut group = c.benchmark_group("bps");
    for dim in [1usize, 10, 100] {
        let pot = Potential::quadratic(1.0, dim).unwrap();
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        let init = PhaseState::new(vec![0.0; dim], v).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(dim), &init, |b, init| {
            let mut rng = chain_rng(7, 0);
            b.iter(|| bps_trajectory(init, &pot, 1.0, black_box(100.0), &mut rng).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_expm, bench_galerkin, bench_bps);
criterion_main!(benches);
