use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use orlicz_lab::orlicz::{check_closeness, mollify, LogGridSpec, DEFAULT_QUADRATURE_ORDER};
use orlicz_lab::{OrliczFunction, Profile};

fn bench_mollified(c: &mut Criterion) {
    let phi = OrliczFunction::sum_powers(2.0, 4.0, 1.0).unwrap();
    let m = mollify(&phi, 0.01, DEFAULT_QUADRATURE_ORDER).unwrap();
    let ts: Vec<f64> = (1..=256).map(|k| 0.02 * k as f64).collect();
    c.bench_function("mollified_eval_256", |b| {
        b.iter(|| ts.iter().map(|&t| m.value(t) + m.deriv(t) + m.deriv2(t)).sum::<f64>())
    });
}

fn bench_closeness(c: &mut Criterion) {
    let phi = OrliczFunction::power(3.0).unwrap();
    let psi = OrliczFunction::derived_sqrt(phi.spec()).unwrap();
    let grid = LogGridSpec::standard();
    c.bench_function("check_closeness_derived_sqrt", |b| {
        b.iter(|| check_closeness(black_box(&phi), black_box(&psi), 3, &grid).unwrap())
    });
}

criterion_group!(benches, bench_mollified, bench_closeness);
criterion_main!(benches);
