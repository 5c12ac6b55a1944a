mod common;

use common::{all_strings, brute_delta, naive_contraction, sphere_monomial};
use exmass_core::intrinsic::riemann_from_sample;
use exmass_core::models::{PolynomialPerturbation, Schwarzschild};
use exmass_core::tensor::{gauss_bonnet_curvature, generalized_delta, p_tensor, AntisymContraction};
use exmass_core::{MetricModel, MultiIndex, RiemannSign, SphereQuadrature};
use proptest::prelude::*;

fn mi(v: &[usize], n: usize) -> MultiIndex {
    MultiIndex::new(v.to_vec(), n).unwrap()
}

/// Antisymmetrizes a raw `n⁴` array in both index pairs.
fn antisym_pair(n: usize, raw: &[f64]) -> Vec<f64> {
    let at = |a: usize, b: usize, c: usize, d: usize| raw[((a * n + b) * n + c) * n + d];
    let mut out = vec![0.0; n.pow(4)];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    out[((a * n + b) * n + c) * n + d] =
                        0.25 * (at(a, b, c, d) - at(b, a, c, d) - at(a, b, d, c) + at(b, a, d, c));
                }
            }
        }
    }
    out
}

#[test]
fn delta_matches_determinant_for_every_tuple_n3_n4() {
    for n in [3usize, 4] {
        for p in 1..=3usize {
            let strings = all_strings(n, p);
            for u in &strings {
                for l in &strings {
                    let got = generalized_delta(&mi(u, n), &mi(l, n)).unwrap();
                    assert_eq!(got, brute_delta(u, l), "n={n} up={u:?} lo={l:?}");
                }
            }
        }
    }
}

#[test]
fn contraction_matches_naive_loops() {
    let n: usize = 4;
    let raw: Vec<f64> = (0..n.pow(4)).map(|k| ((k * 37 % 23) as f64 - 11.0) / 7.0).collect();
    let pair = antisym_pair(n, &raw);
    let single: Vec<f64> = (0..n * n).map(|k| ((k * 13 % 11) as f64 - 5.0) / 3.0).collect();
    for npairs in 0..=2usize {
        for use_single in [false, true] {
            let s = use_single.then_some(single.as_slice());
            if 2 * npairs + usize::from(use_single) == 0 {
                continue;
            }
            let eng = AntisymContraction::new(n, &pair, npairs, s).unwrap();
            for (up, lo) in [(vec![], vec![]), (vec![0], vec![1]), (vec![2], vec![2]), (vec![0, 1], vec![1, 3])] {
                if up.len() + 2 * npairs + usize::from(use_single) > n {
                    continue;
                }
                let fast = eng.eval(&up, &lo);
                let slow = naive_contraction(n, &pair, npairs, s, &up, &lo);
                assert!((fast - slow).abs() <= 1e-10 * (1.0 + slow.abs()), "m={npairs} single={use_single} {up:?}/{lo:?}: {fast} vs {slow}");
            }
        }
    }
}

#[test]
fn quadrature_integrates_monomials_exactly() {
    for n in [2usize, 3, 4, 5] {
        let quad = SphereQuadrature::new(n, 5).unwrap();
        let deg = quad.exactness();
        for alpha in all_strings(deg + 1, n) {
            if alpha.iter().sum::<usize>() > deg {
                continue;
            }
            let got = quad.integrate(|x| x.iter().zip(&alpha).map(|(c, a)| c.powi(*a as i32)).product());
            let want = sphere_monomial(&alpha);
            assert!((got - want).abs() < 1e-12, "n={n} α={alpha:?}: {got} vs {want}");
        }
    }
}

#[test]
fn quadrature_is_not_exact_beyond_its_degree() {
    let quad = SphereQuadrature::new(3, 3).unwrap();
    let d = quad.exactness() + 1;
    let got = quad.integrate(|x| x[0].powi(d as i32));
    assert!((got - sphere_monomial(&[d, 0, 0])).abs() > 1e-6);
}

#[test]
fn first_gauss_bonnet_is_scalar_curvature() {
    let model = PolynomialPerturbation::new(5, 0.05, 3);
    let x = [0.4, -0.3, 0.8, 0.1, -0.6];
    let rp = riemann_from_sample(&model.sample(&x), RiemannSign::Standard).unwrap();
    let n = 5;
    let gi = &rp.metric_inverse;
    let mut scal = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    scal += gi.at2(a, c) * gi.at2(b, d) * rp.riemann_low.at4(a, b, c, d);
                }
            }
        }
    }
    let l1 = gauss_bonnet_curvature(&rp.riemann_mixed, 1).unwrap();
    assert!((l1 - scal).abs() < 1e-11 * (1.0 + scal.abs()), "{l1} vs {scal}");
}

#[test]
fn p_tensor_contracts_to_gauss_bonnet() {
    let model = Schwarzschild { n: 5, m: 2.0, rho_min: 0.5 };
    let x = [1.7, -0.4, 0.9, 1.1, 0.3];
    let rp = riemann_from_sample(&model.sample(&x), RiemannSign::Standard).unwrap();
    let n = 5;
    for q in 1..=2 {
        let p = p_tensor(&rp.riemann_mixed, &rp.metric_inverse, q).unwrap();
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        acc += p.at4(a, b, c, d) * rp.riemann_low.at4(a, b, c, d);
                    }
                }
            }
        }
        let l = gauss_bonnet_curvature(&rp.riemann_mixed, q).unwrap();
        assert!((acc - l).abs() < 1e-10 * (1.0 + l.abs()), "q={q}: {acc} vs {l}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delta_is_antisymmetric_in_upper_indices(
        up in prop::collection::vec(0usize..5, 3),
        lo in prop::collection::vec(0usize..5, 3),
        i in 0usize..3, j in 0usize..3,
    ) {
        prop_assume!(i != j);
        let mut swapped = up.clone();
        swapped.swap(i, j);
        let a = generalized_delta(&mi(&up, 5), &mi(&lo, 5)).unwrap();
        let b = generalized_delta(&mi(&swapped, 5), &mi(&lo, 5)).unwrap();
        prop_assert_eq!(a, -b);
        prop_assert_eq!(a, generalized_delta(&mi(&lo, 5), &mi(&up, 5)).unwrap());
    }

    #[test]
    fn contraction_agrees_with_naive_on_random_factors(
        raw in prop::collection::vec(-1.0f64..1.0, 81),
        single in prop::collection::vec(-1.0f64..1.0, 9),
        npairs in 0usize..=1,
    ) {
        let n = 3;
        let pair = antisym_pair(n, &raw);
        let eng = AntisymContraction::new(n, &pair, npairs, Some(&single)).unwrap();
        let fast = eng.eval(&[], &[]);
        let slow = naive_contraction(n, &pair, npairs, Some(&single), &[], &[]);
        prop_assert!((fast - slow).abs() <= 1e-12 * (1.0 + slow.abs()));
    }

    #[test]
    fn riemann_has_algebraic_symmetries(
        x in prop::collection::vec(-1.0f64..1.0, 5),
        seed in 0u64..1000,
    ) {
        let model = PolynomialPerturbation::new(5, 0.05, seed);
        let rp = riemann_from_sample(&model.sample(&x), RiemannSign::Standard).unwrap();
        let r = &rp.riemann_low;
        let scale = r.max_abs().max(1e-300);
        for a in 0..5 { for b in 0..5 { for c in 0..5 { for d in 0..5 {
            let v = r.at4(a, b, c, d);
            prop_assert!((v + r.at4(b, a, c, d)).abs() <= 1e-12 * scale);
            prop_assert!((v + r.at4(a, b, d, c)).abs() <= 1e-12 * scale);
            prop_assert!((v - r.at4(c, d, a, b)).abs() <= 1e-10 * scale);
            let cyc = v + r.at4(a, c, d, b) + r.at4(a, d, b, c);
            prop_assert!(cyc.abs() <= 1e-10 * scale);
        }}}}
    }
}
