use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use orlicz_lab::fields::{dv_field_analytic, gradient, hessian, mollify_field};
use orlicz_lab::verify::Fixture;
use orlicz_lab::{Grid2D, OrliczFunction};

fn bench_stencils(c: &mut Criterion) {
    let mut group = c.benchmark_group("stencils");
    for n in [129, 257] {
        let u = Fixture::SinCos.sample(Grid2D::square(n, -1.0, 1.0).unwrap());
        group.bench_with_input(BenchmarkId::new("gradient", n), &u, |b, u| b.iter(|| gradient(u)));
        group.bench_with_input(BenchmarkId::new("hessian", n), &u, |b, u| b.iter(|| hessian(u)));
    }
    group.finish();
}

fn bench_nonlinear(c: &mut Criterion) {
    let u = Fixture::Mixed.sample(Grid2D::square(129, -1.0, 1.0).unwrap());
    let psi = OrliczFunction::power(3.0).unwrap();
    c.bench_function("dv_analytic_129", |b| {
        b.iter(|| dv_field_analytic(&psi, &u, 1e-3).unwrap())
    });
    c.bench_function("mollify_field_129", |b| b.iter(|| mollify_field(&u, 0.05).unwrap()));
}

criterion_group!(benches, bench_stencils, bench_nonlinear);
criterion_main!(benches);
