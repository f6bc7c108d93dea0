use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ptel_bench::{constant_problem, regime_params};
use ptel_core::fracops::prabhakar_integral;
use ptel_core::goursat::{ml2_tele, ml3_tele_variant};
use ptel_core::problem::solve;
use ptel_core::specfun::{ml2, ml3, ml_prabhakar};
use ptel_core::volterra::{picard_solve, solve_tau};
use ptel_core::{QuadPolicy, SeriesPolicy, SolveOptions, Variant, VolterraSystem};
use std::hint::black_box;

fn special_functions(c: &mut Criterion) {
    let pol = SeriesPolicy::default();
    let (p, _) = regime_params();
    let e2 = ml2_tele(&p);
    let v1 = ml3_tele_variant(Variant::V1, &p);
    let mut g = c.benchmark_group("specfun");
    for z in [-20.0, -1.0, 2.0] {
        g.bench_with_input(BenchmarkId::new("ml_prabhakar", z), &z, |b, &z| b.iter(|| ml_prabhakar(0.8, 1.2, 0.7, black_box(z), &pol)));
    }
    g.bench_function("ml2_telegraph", |b| b.iter(|| ml2(&e2, black_box(-0.7), black_box(-0.5), &pol)));
    g.bench_function("ml3_telegraph_v1", |b| b.iter(|| ml3(&v1, black_box(-0.7), black_box(-0.25), black_box(-0.5), &pol)));
    g.finish();
}

fn operators(c: &mut Criterion) {
    let (p, _) = regime_params();
    let (quad, pol) = (QuadPolicy::default(), SeriesPolicy::default());
    c.bench_function("prabhakar_integral_sin", |b| b.iter(|| prabhakar_integral(&p, &|t| Ok(t.sin()), black_box(0.8), &quad, &pol)));
}

fn volterra(c: &mut Criterion) {
    let mut g = c.benchmark_group("volterra");
    for n in [64usize, 256] {
        let sys = VolterraSystem::from_functions(1.5, 1.0, 1.0, n, |y| Ok((-y).exp()), |x| Ok(1.0 + x * x)).unwrap();
        g.bench_with_input(BenchmarkId::new("solve_tau", n), &sys, |b, s| b.iter(|| solve_tau(s)));
        g.bench_with_input(BenchmarkId::new("picard", n), &sys, |b, s| b.iter(|| picard_solve(s, 1000, 1e-13)));
    }
    g.finish();
}

fn end_to_end(c: &mut Criterion) {
    let problem = constant_problem();
    let opts = SolveOptions::default();
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    g.bench_function("constant_33x33", |b| b.iter(|| solve(&problem, 32, 32, &opts)));
    g.finish();
}

criterion_group!(benches, special_functions, operators, volterra, end_to_end);
criterion_main!(benches);
