use criterion::{criterion_group, criterion_main, Criterion};
use hypoisson_bench::{desk_field, desk_params, sample_elements};
use hypoisson_core::eisenstein::eisenstein_quad;
use hypoisson_core::lorentz::iwasawa;
use hypoisson_core::specfun::{gauss_2f1, ln_gamma};
use hypoisson_core::sphquad::FocusedRule;
use hypoisson_core::{Complex64, SphereQuadrature};
use std::hint::black_box;

fn special_functions(c: &mut Criterion) {
    let z = Complex64::new(3.7, -2.1);
    c.bench_function("ln_gamma", |b| b.iter(|| ln_gamma(black_box(z))));
    let (a, bb, cc) = (Complex64::new(1.25, 0.7), Complex64::new(1.25, -0.7), Complex64::new(2.5, 0.0));
    c.bench_function("gauss_2f1 z=-0.5", |b| b.iter(|| gauss_2f1(a, bb, cc, black_box(-0.5))));
    c.bench_function("gauss_2f1 z=-40", |b| b.iter(|| gauss_2f1(a, bb, cc, black_box(-40.0))));
}

fn group(c: &mut Criterion) {
    let gs = sample_elements(4, 64);
    c.bench_function("iwasawa n=4 (64 elements)", |b| {
        b.iter(|| gs.iter().map(|g| iwasawa(black_box(g)).t).sum::<f64>())
    });
}

fn transforms(c: &mut Criterion) {
    let mut g = c.benchmark_group("transforms");
    g.sample_size(10);
    let field = desk_field(FocusedRule { panel_points: 8, level: 3 });
    let x = sample_elements(4, 1).remove(0);
    g.bench_function("poisson eval n=4 p=1", |b| b.iter(|| field.eval(black_box(&x)).unwrap()));
    let params = desk_params(1);
    let quad = SphereQuadrature::build(4, 3).unwrap();
    g.bench_function("eisenstein_quad n=4 level 3", |b| b.iter(|| eisenstein_quad(&params, black_box(1.0), &quad).unwrap()));
    g.finish();
}

criterion_group!(benches, special_functions, group, transforms);
criterion_main!(benches);
