use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use critns_bench::{grid, random_field};
use critns_core::{
    heat_semigroup, leray_project, nonlinear_term, place_profile, sample_datum, step,
    AnalyticDatum, ProfileSpec, SolverConfig,
};

fn transforms(c: &mut Criterion) {
    let g = grid(32);
    let f = random_field(&g, 1);
    c.bench_function("transform_roundtrip_32", |b| {
        b.iter(|| black_box(&f).to_physical().unwrap().to_spectral().0)
    });
}

fn operators(c: &mut Criterion) {
    let g = grid(32);
    let f = random_field(&g, 2);
    c.bench_function("nonlinear_term_32", |b| {
        b.iter(|| nonlinear_term(black_box(&f)).unwrap())
    });
    c.bench_function("heat_semigroup_32", |b| {
        b.iter(|| heat_semigroup(black_box(&f), 0.1).unwrap())
    });
    c.bench_function("leray_project_32", |b| {
        b.iter(|| leray_project(black_box(&f)))
    });
    c.bench_function("sobolev_half_norm_32", |b| {
        b.iter(|| black_box(&f).sobolev_norm(0.5).unwrap())
    });
}

fn solver_step(c: &mut Criterion) {
    let g = grid(24);
    let f = random_field(&g, 3).scaled(0.1);
    let cfg = SolverConfig::standard(1.0 / 64.0);
    c.bench_function("duhamel_step_24", |b| {
        b.iter(|| step(black_box(&f), 1.0 / 64.0, &cfg).unwrap())
    });
}

fn placement(c: &mut Criterion) {
    let g = grid(48);
    let datum = AnalyticDatum::LocalizedVortex {
        width: critns_bench::TWO_PI / 16.0,
        amplitude: 1.0,
    };
    let mid = critns_bench::TWO_PI / 2.0;
    c.bench_function("place_vortex_48", |b| {
        b.iter(|| {
            place_profile(
                &ProfileSpec::new(black_box(datum.clone()), 0.5, [mid, mid, mid]),
                &g,
            )
            .unwrap()
        })
    });
    let tg = AnalyticDatum::taylor_green(critns_bench::TWO_PI);
    c.bench_function("sample_taylor_green_48", |b| {
        b.iter(|| sample_datum(black_box(&tg), &g).unwrap())
    });
}

criterion_group!(benches, transforms, operators, solver_step, placement);
criterion_main!(benches);
