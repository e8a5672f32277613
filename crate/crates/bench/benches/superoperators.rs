use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dickecool::lindblad::{dissipator_cavity_cooling, generator_spin_master_equation};
use dickecool::propagate::{log_grid, Method};
use dickecool::su4::{Component, Family, GeneratorId};
use dickecool::symspace::lift_one_body;
use dickecool::{evolve_state, GeneratorCatalog, ModelParams, OccupationBasis, PropagationSpec, SymState};

fn basis(c: &mut Criterion) {
    let mut g = c.benchmark_group("basis");
    for n in [10usize, 50, 100] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| OccupationBasis::new(black_box(n)).unwrap()));
    }
    g.finish();
}

fn lift(c: &mut Criterion) {
    let mut g = c.benchmark_group("lift_one_body");
    let seed = GeneratorId::new(Family::Q, Component::Plus).seed();
    for n in [10usize, 50, 100] {
        let b = OccupationBasis::new(n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &b, |bch, b| bch.iter(|| lift_one_body(b, black_box(&seed))));
    }
    g.finish();
}

fn cooling_dissipator(c: &mut Criterion) {
    let mut g = c.benchmark_group("cavity_cooling_dissipator");
    g.sample_size(10);
    for n in [10usize, 40] {
        let cat = GeneratorCatalog::new(Arc::new(OccupationBasis::new(n).unwrap()));
        g.bench_with_input(BenchmarkId::from_parameter(n), &cat, |b, cat| b.iter(|| dissipator_cavity_cooling(cat, 1.0, 0.5)));
    }
    g.finish();
}

fn evolve(c: &mut Criterion) {
    let mut g = c.benchmark_group("evolve");
    g.sample_size(10);
    for (n, method) in [(10usize, Method::DenseExpm), (10, Method::KrylovExpmAction), (30, Method::KrylovExpmAction)] {
        let cat = GeneratorCatalog::new(Arc::new(OccupationBasis::new(n).unwrap()));
        let l = generator_spin_master_equation(&cat, &ModelParams::with_lambda(n, 1.0, 10.0, 0.0).unwrap()).unwrap();
        let mm = SymState::maximally_mixed(cat.basis().clone());
        let spec = PropagationSpec::new(log_grid(10.0, 50)).with_method(method);
        g.bench_function(BenchmarkId::new(method.to_string(), n), |b| b.iter(|| evolve_state(&l, &mm, &spec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, basis, lift, cooling_dissipator, evolve);
criterion_main!(benches);
