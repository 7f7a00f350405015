use std::f64::consts::FRAC_PI_2;

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use magnon_bench::{fixture, mode};
use magnon_core::chain::{closed_form_links, omega_rates, uniform_links};
use magnon_core::dynamics::{optimize_transfer_times, HybridState, Propagator};
use magnon_core::inhomogeneity::{sample_shifts, SingleExcitationModel};
use magnon_core::linalg::C64;

fn rates(c: &mut Criterion) {
    let mut group = c.benchmark_group("omega_rates");
    for n in [1_000, 50_000] {
        let (bath, config) = fixture(n, 0.5);
        let m = mode(&bath, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| omega_rates(black_box(&config), &m).unwrap())
        });
    }
    group.finish();
}

fn links(c: &mut Criterion) {
    let (bath, config) = fixture(50_000, 0.5);
    let m = mode(&bath, 2);
    c.bench_function("closed_form_links/50000/k16", |b| {
        b.iter(|| closed_form_links(black_box(&config), &m, 16).unwrap())
    });
}

fn propagator(c: &mut Criterion) {
    let chain = uniform_links(1.0, 0.5, 32).unwrap();
    c.bench_function("propagator/build/k32", |b| b.iter(|| Propagator::new(black_box(&chain))));
    let prop = Propagator::new(&chain);
    let psi = HybridState::initial(&prop.layout, C64::new(0.6, 0.0), C64::new(0.0, 0.8)).amplitudes;
    c.bench_function("propagator/apply/k32", |b| b.iter(|| prop.apply(black_box(&psi), FRAC_PI_2)));
}

fn optimizer(c: &mut Criterion) {
    let prop = Propagator::new(&uniform_links(1.0, 0.55, 24).unwrap());
    c.bench_function("optimize_transfer_times/leakage0.3", |b| {
        b.iter(|| optimize_transfer_times(black_box(&prop), 1e-8).unwrap())
    });
}

fn expm(c: &mut Criterion) {
    let n = 10_000;
    let a = vec![1.0; n];
    let shifts = sample_shifts(0.1, 0.0, n, 3).unwrap();
    let model = SingleExcitationModel::new(&a, 1.0, shifts.delta_q).unwrap();
    let mut v = vec![C64::new(0.0, 0.0); model.dim()];
    v[0] = C64::new(1.0, 0.0);
    c.bench_function("expm_multiply/single_excitation/10000", |b| {
        b.iter(|| model.evolve(black_box(&v), FRAC_PI_2))
    });
}

criterion_group!(benches, rates, links, propagator, optimizer, expm);
criterion_main!(benches);
