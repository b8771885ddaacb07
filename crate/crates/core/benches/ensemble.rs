use std::hint::black_box;

use almost_thermal::*;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn trajectories(c: &mut Criterion) {
    let params = ModelParams::qubit(0.1);
    let res = ReservoirModel::hamiltonian(0.05).unwrap();
    let p0 = Population::qubit(0.5).unwrap();
    let mut group = c.benchmark_group("run_ensemble");
    group.sample_size(10);
    for n in [1_000usize, 10_000] {
        group.throughput(Throughput::Elements((n * 200) as u64));
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| run_ensemble(&p0, &params, &res, 200, n, 7, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn samples(c: &mut Criterion) {
    let params = ModelParams::qubit(0.1);
    let model = ObservableModel::new(Observable::Work, 0.5, &params, 0.02).unwrap();
    let mut group = c.benchmark_group("empirical_distribution");
    group.sample_size(10);
    for n in [100_000usize, 1_000_000] {
        group.throughput(Throughput::Elements(n as u64));
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| empirical_distribution(black_box(&model), n, 7, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn densities(c: &mut Criterion) {
    let params = ModelParams::qubit(0.1);
    let model = ObservableModel::new(Observable::Work, 0.5, &params, 0.02).unwrap();
    c.bench_function("work_density_curve_exact", |b| {
        b.iter(|| black_box(&model).curve(DensityMode::ExactNumeric).unwrap())
    });
}

criterion_group!(benches, trajectories, samples, densities);
criterion_main!(benches);
