//! Parallel vs sequential comparison for the data-parallel inner loops:
//! the quadrature-node evaluation of the averaged nonlinearity, one RK4 step
//! of the averaged solver, and a small ε-sweep.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use dmnls_core::grid::gaussian_profile;
use dmnls_core::harness::{sweep_epsilon, SweepConfig};
use dmnls_core::nonlinear::q_averaged;
use dmnls_core::solver::{solve_averaged, SolveConfig};
use dmnls_core::{Execution, QuadratureRule, SpatialGrid};

fn bench_q_averaged(c: &mut Criterion) {
    // node tasks are ~2 FFTs each, so the winning grain depends on n: at the
    // desk-scale n = 512 the fork/join overhead usually eats the gain, while
    // larger grids amortize it
    for n in [512usize, 4096] {
        let grid = SpatialGrid::new(n, 16.0 * std::f64::consts::PI).unwrap();
        let v = gaussian_profile(&grid, 1.0, 1.0, 0.0, 0.0).unwrap();
        let mut group = c.benchmark_group(format!("q_averaged_32_nodes_n{n}"));
        for (label, exec) in
            [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
        {
            let rule = QuadratureRule::gauss_legendre(32).unwrap();
            group.bench_with_input(BenchmarkId::from_parameter(label), &exec, |b, &exec| {
                b.iter(|| q_averaged(black_box(&v), 0.2, &rule, exec).unwrap());
            });
        }
        group.finish();
    }
}

fn bench_averaged_solve(c: &mut Criterion) {
    let grid = SpatialGrid::new(512, 16.0 * std::f64::consts::PI).unwrap();
    let v = gaussian_profile(&grid, 1.0, 1.0, 0.0, 0.0).unwrap();
    let mut group = c.benchmark_group("averaged_solve_50_steps");
    group.sample_size(10);
    for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &exec, |b, &exec| {
            let mut cfg = SolveConfig::new(0.05, 1, 1e-3).unwrap().with_stride(1 << 20);
            cfg.exec = exec;
            b.iter(|| solve_averaged(black_box(&v), 0.2, 0.5, &cfg).unwrap());
        });
    }
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let grid = SpatialGrid::new(256, 16.0 * std::f64::consts::PI).unwrap();
    let v = gaussian_profile(&grid, 1.0, 1.0, 0.0, 0.0).unwrap();
    let mut group = c.benchmark_group("sweep_three_eps");
    group.sample_size(10);
    for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_with_input(BenchmarkId::from_parameter(label), &exec, |b, &exec| {
            let mut cfg = SweepConfig::new(0.2, 0.5, 0.2).unwrap();
            cfg.dt = 2e-3;
            cfg.snapshot_intervals = 20;
            cfg.exec = exec;
            b.iter(|| sweep_epsilon(black_box(&v), &cfg, &[0.1, 0.05, 0.025]).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, bench_q_averaged, bench_averaged_solve, bench_sweep);
criterion_main!(benches);
