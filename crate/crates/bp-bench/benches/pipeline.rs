//! Benchmarks for the hot paths: quadrature construction and integration,
//! harmonic projection, the positive-definiteness test, and a full
//! scenario run.

use bp_core::engine::run_scenario;
use bp_core::harmonics::{degree_projection, sample_on_quadrature};
use bp_core::quadrature::{build_sphere_quadrature, integrate_sphere};
use bp_core::scenario::{builtin_scenario, resolve};
use bp_core::transforms::pd_test;
use bp_core::{Direction, PdSettings, Scheme};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

fn bench_quadrature(c: &mut Criterion) {
    c.bench_function("build_sphere_quadrature n=3 res=32", |b| {
        b.iter(|| build_sphere_quadrature(black_box(3), black_box(32), Scheme::ProductGauss))
    });
    let quad = build_sphere_quadrature(3, 32, Scheme::ProductGauss).unwrap();
    c.bench_function("integrate_sphere n=3 res=32", |b| {
        b.iter(|| integrate_sphere(|v: &Direction| v.coords()[2].powi(4), black_box(&quad)))
    });
}

fn bench_projection(c: &mut Criterion) {
    let quad = build_sphere_quadrature(3, 24, Scheme::ProductGauss).unwrap();
    let samples = sample_on_quadrature(|v: &Direction| (1.0 + v.coords()[2].powi(2)).recip(), &quad);
    c.bench_function("degree_projection m=8 n=3 res=24", |b| {
        b.iter(|| degree_projection(black_box(&samples), black_box(8), &quad))
    });
}

fn bench_pd_test(c: &mut Criterion) {
    let quad = build_sphere_quadrature(3, 16, Scheme::ProductGauss).unwrap();
    let settings = PdSettings::default();
    c.bench_function("pd_test sup-norm ball n=3 res=16", |b| {
        b.iter(|| {
            pd_test(
                |v: &Direction| {
                    let m = v.coords().iter().fold(0.0f64, |a, &x| a.max(x.abs()));
                    m.recip()
                },
                8,
                black_box(&quad),
                &settings,
            )
        })
    });
}

fn bench_scenario(c: &mut Criterion) {
    let (scenario, _) = resolve(&builtin_scenario("example-3.3").unwrap()).unwrap();
    c.bench_function("run_scenario builtin mixed-power", |b| {
        b.iter_batched(
            || scenario.clone(),
            |s| run_scenario(black_box(&s)),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    benches,
    bench_quadrature,
    bench_projection,
    bench_pd_test,
    bench_scenario
);
criterion_main!(benches);
