use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use te_shape::{box_stats, solve, MethodChoice, SolverConfig};
use te_shape_bench::{pwl_market, quadratic_market, samples};

fn solvers(c: &mut Criterion) {
    let cfg = SolverConfig::default();
    let mut group = c.benchmark_group("solve");
    for n in [10, 1000, 10_000] {
        let quad = quadratic_market(n, 1);
        let pwl = pwl_market(n, 2);
        group.bench_with_input(BenchmarkId::new("quadratic_closed", n), &quad, |b, inst| {
            b.iter(|| solve(black_box(inst), &cfg, MethodChoice::Closed).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("quadratic_bisect", n), &quad, |b, inst| {
            b.iter(|| solve(black_box(inst), &cfg, MethodChoice::Bisect).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("pwl_closed", n), &pwl, |b, inst| {
            b.iter(|| solve(black_box(inst), &cfg, MethodChoice::Closed).unwrap())
        });
    }
    group.finish();
}

fn stats(c: &mut Criterion) {
    let xs = samples(1000, 3);
    c.bench_function("box_stats_1000", |b| b.iter(|| box_stats(black_box(&xs)).unwrap()));
}

criterion_group!(benches, solvers, stats);
criterion_main!(benches);
