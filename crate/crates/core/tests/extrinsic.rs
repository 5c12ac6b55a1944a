mod common;

use common::{elementary_symmetric, principal_curvatures, random_hypersurface_sample};
use exmass_core::extrinsic::{
    divergence_identity_residual, extrinsic_from_sample, gauss_relation_residual, gauss_relation_residual_with,
    mean_curvatures, newton_transformation, pohozaev_schoen_residual,
};
use exmass_core::identities::test_fields;
use exmass_core::models::{Codim2Graph, FlatInclusion, PolynomialPerturbation, RandomPolyGraph, StereographicSphere};
use exmass_core::{extrinsic_at, ExtrinsicPoint, ImmersionModel, RiemannSign};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn s_scalar(ep: &ExtrinsicPoint, p: usize, nu: &[f64]) -> f64 {
    let set = mean_curvatures(ep, p).unwrap();
    match set.value_even {
        Some(v) => v,
        None => set.value_odd.unwrap().iter().zip(nu).map(|(a, b)| a * b).sum(),
    }
}

#[test]
fn affine_plane_has_no_second_fundamental_form() {
    let model = FlatInclusion { n: 5, d: 7 };
    let ep = extrinsic_at(&model, &[0.3, -1.0, 2.0, 0.5, 0.1]).unwrap();
    assert!(ep.second_ff.iter().all(|v| *v == 0.0));
    assert_eq!(ep.s_even(2), 0.0);
    assert!(ep.s_odd(3).iter().all(|v| *v == 0.0));
}

#[test]
fn round_sphere_is_umbilic() {
    let (n, r) = (4usize, 1.5f64);
    let model = StereographicSphere { n, r };
    let ep = extrinsic_at(&model, &[0.4, -0.2, 0.9, 0.3]).unwrap();
    let pos = &ep.position;
    let centre_dist = pos.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((centre_dist - r).abs() < 1e-12);
    // B_ij = −g_ij ψ/r², so σ_p = C(n,p) r^{-p} in the inward normal.
    let inward: Vec<f64> = pos.iter().map(|v| -v / r).collect();
    for i in 0..n {
        for j in 0..n {
            for (a, b) in ep.b(i, j).iter().enumerate() {
                let want = ep.induced_metric.at2(i, j) * inward[a] / r;
                assert!((b - want).abs() < 1e-10);
            }
        }
    }
    let binom = |p: usize| (0..p).map(|k| (n - k) as f64 / (k + 1) as f64).product::<f64>();
    for p in 1..=n {
        let s = s_scalar(&ep, p, &inward);
        let want = binom(p) / r.powi(p as i32);
        assert!((s - want).abs() < 1e-10 * want, "p={p}: {s} vs {want}");
    }
}

#[test]
fn newton_tensor_matches_classical_recursion() {
    let vals: Vec<f64> = (0..40).map(|k| ((k * 29 % 17) as f64 - 8.0) / 9.0).collect();
    let s = random_hypersurface_sample(&vals);
    let ep = extrinsic_from_sample(&s, &[0.0; 3]).unwrap();
    let (kappa, nu, g, h) = principal_curvatures(&s);
    let a = g.clone().try_inverse().unwrap() * &h;
    let n = 3;
    for p in 0..=n {
        // P_p = Σ_k (−1)^k σ_{p−k} A^k, lowered with g.
        let mut pp = DMatrix::zeros(n, n);
        let mut ak = DMatrix::identity(n, n);
        for k in 0..=p {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            pp += sign * elementary_symmetric(&kappa, p - k) * &ak;
            ak = &ak * &a;
        }
        let lowered = &g * pp;
        let set = newton_transformation(&ep, p).unwrap();
        for i in 0..n {
            for j in 0..n {
                let got = match &set.newton_even {
                    Some(t) => t.at2(i, j),
                    None => (0..4).map(|al| set.newton_odd.as_ref().unwrap()[(i * n + j) * 4 + al] * nu[al]).sum(),
                };
                assert!((got - lowered[(i, j)]).abs() < 1e-10, "p={p} ({i},{j}): {got} vs {}", lowered[(i, j)]);
            }
        }
    }
}

#[test]
fn newton_tensor_vanishes_above_dimension() {
    let model = Codim2Graph { n: 3, c1: 1.0, sigma1: 1.0, c2: 0.5, sigma2: 1.5 };
    let ep = extrinsic_at(&model, &[0.5, -0.4, 0.8]).unwrap();
    let t4 = newton_transformation(&ep, 4).unwrap().newton_even.unwrap();
    assert_eq!(t4.max_abs(), 0.0);
    assert_eq!(mean_curvatures(&ep, 4).unwrap().value_even, Some(0.0));
    assert!(mean_curvatures(&ep, 5).is_err());
}

#[test]
fn gauss_relation_holds_and_fails_with_flipped_sign() {
    let model = RandomPolyGraph::new(5, 2, 0.3, 4);
    let x = [0.4, -0.6, 0.2, 0.9, -0.3];
    for q in 1..=2 {
        assert!(gauss_relation_residual(&model, &x, q).unwrap() < 1e-8);
    }
    let flipped = gauss_relation_residual_with(&model, &x, 1, RiemannSign::Flipped).unwrap();
    assert!(flipped > 1.0, "{flipped}");
}

#[test]
fn divergence_identity_converges_quadratically() {
    let model = RandomPolyGraph::new(5, 1, 0.3, 8);
    let x = [0.4, -0.6, 0.2, 0.9, -0.3];
    for q in 1..=2 {
        let r1 = divergence_identity_residual(&model, &x, q, 1e-2).unwrap();
        let r2 = divergence_identity_residual(&model, &x, q, 5e-3).unwrap();
        assert!((r1 / r2 - 4.0).abs() < 0.4, "q={q}: {r1} / {r2}");
    }
}

#[test]
fn pohozaev_schoen_converges_quadratically() {
    let model = PolynomialPerturbation::new(4, 0.05, 2);
    let (k, v) = test_fields(4, 17);
    let x = [0.7, -0.2, 0.5, 0.1];
    let r1 = pohozaev_schoen_residual(&k, &v, &model, &x, 1e-2).unwrap();
    let r2 = pohozaev_schoen_residual(&k, &v, &model, &x, 5e-3).unwrap();
    assert!((r1 / r2 - 4.0).abs() < 0.4, "{r1} / {r2}");
}

#[test]
fn tangential_leak_is_roundoff() {
    let model = Codim2Graph { n: 5, c1: 1.0, sigma1: 1.5, c2: 0.5, sigma2: 2.0 };
    let ep = extrinsic_at(&model, &[1.0, 0.5, -0.7, 0.2, 1.3]).unwrap();
    assert!(ep.tangential_leak() < 1e-12);
    assert!(ImmersionModel::ambient_dim(&model) == 7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mean_curvatures_are_elementary_symmetric_functions(vals in prop::collection::vec(-1.0f64..1.0, 40)) {
        let s = random_hypersurface_sample(&vals);
        let ep = extrinsic_from_sample(&s, &[0.0; 3]).unwrap();
        let (kappa, nu, _, _) = principal_curvatures(&s);
        for p in 0..=3 {
            let want = elementary_symmetric(&kappa, p);
            let got = s_scalar(&ep, p, &nu);
            prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()), "p={}: {} vs {}", p, got, want);
        }
    }
}
