//! Sequential vs rayon-parallel execution of the data-parallel stages.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use multispec::experiments::{example1, plateau};
use multispec::projection::{default_eps, project_with};
use multispec::*;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn theory_matrix(c: &mut Criterion) {
    let spec = example1();
    let p = spec.exponent().unwrap();
    let basis = spec.basis().unwrap();
    let lambdas = spec.lambdas().unwrap();
    let mut group = c.benchmark_group("theory_matrix_300x400");
    group.sample_size(10);
    for (name, execution) in MODES {
        let cfg = AssemblyConfig {
            execution,
            ..AssemblyConfig::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| build_theory_matrix(&p, &lambdas, &basis, cfg).unwrap())
        });
    }
    group.finish();
}

fn projection(c: &mut Criterion) {
    let spec = plateau();
    let p = spec.exponent().unwrap();
    let part = partition_levelsets(&p, 4000, default_eps(&p)).unwrap();
    let mut group = c.benchmark_group("plateau_projection");
    for (name, execution) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| project_with(&spec.rho0, &part, execution).unwrap().cell_averages().len())
        });
    }
    group.finish();
}

fn repeated_runs(c: &mut Criterion) {
    let mut spec = example1();
    spec.methods.retain(|m| m.method == Method::Tikhonov);
    spec.repeats = 16;
    spec.measurements = 100;
    spec.nodes = 120;
    let mut group = c.benchmark_group("example1_tikhonov_16_runs");
    group.sample_size(10);
    for (name, execution) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_example(&spec, execution).unwrap().summaries[0].mean_relative_error)
        });
    }
    group.finish();
}

criterion_group!(benches, theory_matrix, projection, repeated_runs);
criterion_main!(benches);
