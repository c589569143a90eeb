use airy_bench::gaussian_fixture;
use airy_core::airy::evolve_padded;
use airy_core::functional::{el_map_with_norm, DEFAULT_PAD};
use airy_core::multilinear::{m_form, Indicator, Profile, SamplerConfig};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn kernels(c: &mut Criterion) {
    let (f, stg) = gaussian_fixture(256, 0.125, 1.0, 129);
    c.bench_function("evolve_pad4_256x129", |b| {
        b.iter(|| evolve_padded(black_box(&f), &stg, DEFAULT_PAD).unwrap())
    });
    c.bench_function("el_map_256x129", |b| b.iter(|| el_map_with_norm(black_box(&f), &stg, DEFAULT_PAD).unwrap()));

    let ind = Indicator::symmetric(1.0);
    let profiles: [&dyn Profile; 8] = [&ind; 8];
    let cfg = SamplerConfig::symmetric(1.0, 100_000, 1e-4, 7);
    c.bench_function("m_form_1e5", |b| b.iter(|| m_form(black_box(&profiles), &cfg).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = kernels
}
criterion_main!(benches);
