use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use exmass_core::intrinsic::riemann_from_sample;
use exmass_core::models::{Codim2Graph, Schwarzschild};
use exmass_core::tensor::{gauss_bonnet_curvature, lovelock_tensor, p_tensor};
use exmass_core::{extrinsic_at, MetricModel, RiemannSign};

fn lovelock(c: &mut Criterion) {
    let mut group = c.benchmark_group("lovelock");
    for n in [5usize, 7] {
        let model = Schwarzschild { n, m: 1.0, rho_min: 0.5 };
        let x: Vec<f64> = (0..n).map(|i| 1.0 + 0.3 * i as f64).collect();
        let rp = riemann_from_sample(&model.sample(&x), RiemannSign::Standard).unwrap();
        for q in 1..=2usize {
            if 2 * q >= n {
                continue;
            }
            let id = format!("n{n}-q{q}");
            group.bench_with_input(BenchmarkId::new("gauss-bonnet", &id), &q, |b, &q| {
                b.iter(|| gauss_bonnet_curvature(black_box(&rp.riemann_mixed), q).unwrap())
            });
            group.bench_with_input(BenchmarkId::new("p-tensor", &id), &q, |b, &q| {
                b.iter(|| p_tensor(black_box(&rp.riemann_mixed), &rp.metric_inverse, q).unwrap())
            });
            group.bench_with_input(BenchmarkId::new("lovelock-tensor", &id), &q, |b, &q| {
                b.iter(|| lovelock_tensor(black_box(&rp.riemann_mixed), &rp.metric, q).unwrap())
            });
        }
    }
    group.finish();
}

fn mean_curvatures(c: &mut Criterion) {
    let model = Codim2Graph { n: 5, c1: 1.0, sigma1: 1.5, c2: 0.5, sigma2: 2.0 };
    let ep = extrinsic_at(&model, &[1.0, -0.5, 0.7, 0.2, 1.1]).unwrap();
    let mut group = c.benchmark_group("mean-curvature");
    for p in [2usize, 4] {
        group.bench_with_input(BenchmarkId::new("s-even", p), &p, |b, &p| b.iter(|| black_box(&ep).s_even(p)));
        group.bench_with_input(BenchmarkId::new("pairing", p + 1), &p, |b, &p| b.iter(|| black_box(&ep).pairing(p + 1)));
    }
    group.finish();
}

criterion_group!(benches, lovelock, mean_curvatures);
criterion_main!(benches);
