use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use exmass_core::mass::{adm_flux, bulk_identity_integral, gbc_flux_coordinate, gbc_flux_lovelock, BulkConfig, VectorField};
use exmass_core::models::{Codim2Graph, Schwarzschild};
use exmass_core::SphereQuadrature;

fn sphere_fluxes(c: &mut Criterion) {
    let model = Schwarzschild { n: 3, m: 1.0, rho_min: 0.5 };
    let quad = SphereQuadrature::new(3, 32).unwrap();
    let mut group = c.benchmark_group("flux-n3-32");
    group.bench_function("adm", |b| b.iter(|| adm_flux(&model, black_box(100.0), &quad).unwrap()));
    group.bench_function("gbc-q1", |b| b.iter(|| gbc_flux_coordinate(&model, 1, black_box(100.0), &quad).unwrap()));
    group.bench_function("lovelock-x-q1", |b| {
        b.iter(|| gbc_flux_lovelock(&model, 1, black_box(100.0), &quad, VectorField::Position).unwrap())
    });
    group.finish();
}

fn bulk(c: &mut Criterion) {
    let model = Codim2Graph { n: 5, c1: 1.0, sigma1: 1.5, c2: 0.5, sigma2: 2.0 };
    let cfg = BulkConfig { r_max: 50.0, nodes_per_angle: 3, radial_nodes: 4, ..BulkConfig::default() };
    let mut group = c.benchmark_group("bulk");
    group.sample_size(10);
    group.bench_function("codim2-q1", |b| b.iter(|| bulk_identity_integral(&model, 1, black_box(&cfg)).unwrap()));
    group.finish();
}

criterion_group!(benches, sphere_fluxes, bulk);
criterion_main!(benches);
