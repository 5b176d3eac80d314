use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use krotov_lq::{integrate_mdre, solve_algebraic, solve_standard_are, NewtonOptions};
use krotov_lq_bench::{finite_chain, infinite_chain};

fn newton(c: &mut Criterion) {
    let mut group = c.benchmark_group("newton_multistart");
    group.sample_size(10);
    for n in [2, 4] {
        let problem = infinite_chain(n);
        let opts = NewtonOptions { n_starts: 50, ..NewtonOptions::default() };
        group.bench_with_input(BenchmarkId::from_parameter(n), &problem, |b, p| {
            b.iter(|| solve_algebraic(black_box(p), &opts).unwrap())
        });
    }
    group.finish();
}

fn are(c: &mut Criterion) {
    let mut group = c.benchmark_group("hamiltonian_are");
    for n in [2, 4, 8] {
        let problem = infinite_chain(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &problem, |b, p| {
            b.iter(|| solve_standard_are(black_box(p)).unwrap())
        });
    }
    group.finish();
}

fn mdre(c: &mut Criterion) {
    let mut group = c.benchmark_group("mdre_rk4");
    group.sample_size(10);
    for n in [2, 4, 8] {
        let problem = finite_chain(n, 5.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &problem, |b, p| {
            b.iter(|| integrate_mdre(black_box(p), 1e-3).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, newton, are, mdre);
criterion_main!(benches);
