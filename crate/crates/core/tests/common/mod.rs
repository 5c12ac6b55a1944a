//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's contraction, quadrature or curvature code.
#![allow(dead_code, clippy::needless_range_loop, clippy::manual_is_multiple_of)]

use std::f64::consts::PI;

use exmass_core::ImmersionSample;
use nalgebra::{DMatrix, Matrix3, SymmetricEigen};

/// `det(δ^{u_i}_{l_j})` by Leibniz expansion over all permutations.
pub fn brute_delta(upper: &[usize], lower: &[usize]) -> f64 {
    let p = upper.len();
    assert_eq!(p, lower.len());
    let mut perm: Vec<usize> = (0..p).collect();
    let mut total = 0.0;
    permute(&mut perm, 0, &mut |sigma| {
        let mut inv = 0;
        for i in 0..p {
            for j in i + 1..p {
                if sigma[i] > sigma[j] {
                    inv += 1;
                }
            }
        }
        let sign = if inv % 2 == 0 { 1.0 } else { -1.0 };
        if (0..p).all(|i| upper[i] == lower[sigma[i]]) {
            total += sign;
        }
    });
    total
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Every string of length `len` over `0..n`.
pub fn all_strings(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; len];
    loop {
        out.push(idx.clone());
        let mut k = 0;
        while k < len {
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == len {
            return out;
        }
    }
}

/// `Σ_{a,b} δ^{u a}_{l b} Π F(a a; b b) [M(a; b)]` with unrestricted loops.
pub fn naive_contraction(
    n: usize,
    pair: &[f64],
    npairs: usize,
    single: Option<&[f64]>,
    up: &[usize],
    lo: &[usize],
) -> f64 {
    let len = 2 * npairs + usize::from(single.is_some());
    let strings = all_strings(n, len);
    let mut total = 0.0;
    for a in &strings {
        for b in &strings {
            let mut u = up.to_vec();
            u.extend_from_slice(a);
            let mut l = lo.to_vec();
            l.extend_from_slice(b);
            let d = brute_delta(&u, &l);
            if d == 0.0 {
                continue;
            }
            let mut prod = d;
            for s in 0..npairs {
                let (a1, a2, b1, b2) = (a[2 * s], a[2 * s + 1], b[2 * s], b[2 * s + 1]);
                prod *= pair[((a1 * n + a2) * n + b1) * n + b2];
            }
            if let Some(m) = single {
                prod *= m[a[len - 1] * n + b[len - 1]];
            }
            total += prod;
        }
    }
    total
}

/// Elementary symmetric polynomial `σ_p` of `x`.
pub fn elementary_symmetric(x: &[f64], p: usize) -> f64 {
    let mut e = vec![0.0; p + 1];
    e[0] = 1.0;
    for &v in x {
        for k in (1..=p).rev() {
            e[k] += v * e[k - 1];
        }
    }
    e[p]
}

/// `Γ(k/2)` for a positive integer `k`.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k > 0);
    if k % 2 == 0 {
        (1..k / 2).map(|j| j as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < k as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// `∫_{S^{n−1}} Π x_i^{α_i} dΩ = 2 Π Γ(β_i) / Γ(Σ β_i)` with `β_i = (α_i+1)/2`; zero for odd exponents.
pub fn sphere_monomial(alpha: &[usize]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let num: f64 = alpha.iter().map(|a| gamma_half(a + 1)).product();
    let total: usize = alpha.iter().map(|a| a + 1).sum();
    2.0 * num / gamma_half(total)
}

/// Analytic coordinate-ADM flux of isotropic Schwarzschild at radius `ρ`:
/// `m·φ^{(6−n)/(n−2)}` with `φ = 1 + m/(2ρ^{n−2})`.
pub fn schwarzschild_adm_flux(n: usize, m: f64, rho: f64) -> f64 {
    let phi = 1.0 + m / (2.0 * rho.powi(n as i32 - 2));
    m * phi.powf((6.0 - n as f64) / (n as f64 - 2.0))
}

/// Random real symmetric `n×n` matrix and a random SPD matrix from a seed.
pub fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = next();
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    m
}

/// Random hypersurface jet in ℝ⁴: tangent frame `T`, hessians `H_ij = h_ij ν₀ + tangential noise`.
pub fn random_hypersurface_sample(vals: &[f64]) -> ImmersionSample {
    let (n, d) = (3usize, 4usize);
    let mut dpsi = vec![0.0; n * d];
    for i in 0..n {
        for a in 0..d {
            dpsi[i * d + a] = if i == a { 1.0 } else { 0.0 } + 0.4 * vals[i * d + a];
        }
    }
    let mut ddpsi = vec![0.0; n * n * d];
    let mut k = 12;
    for i in 0..n {
        for j in i..n {
            for a in 0..d {
                let v = vals[k % vals.len()] * 2.0;
                k += 1;
                ddpsi[(i * n + j) * d + a] = v;
                ddpsi[(j * n + i) * d + a] = v;
            }
        }
    }
    ImmersionSample { dim: n, ambient: d, psi: vec![0.3, -0.1, 0.7, 0.2], dpsi, ddpsi }
}

/// Principal curvatures of a hypersurface jet, computed without the library.
pub fn principal_curvatures(s: &ImmersionSample) -> (Vec<f64>, Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    let (n, d) = (3usize, 4usize);
    // Unit normal by cofactor expansion of the 3×4 tangent matrix.
    let mut nu = vec![0.0; d];
    for k in 0..d {
        let cols: Vec<usize> = (0..d).filter(|c| *c != k).collect();
        let m = Matrix3::from_fn(|r, c| s.tangent(r)[cols[c]]);
        nu[k] = if k % 2 == 0 { 1.0 } else { -1.0 } * m.determinant();
    }
    let len = nu.iter().map(|v| v * v).sum::<f64>().sqrt();
    nu.iter_mut().for_each(|v| *v /= len);
    let g = DMatrix::from_fn(n, n, |i, j| (0..d).map(|a| s.tangent(i)[a] * s.tangent(j)[a]).sum());
    let h = DMatrix::from_fn(n, n, |i, j| (0..d).map(|a| s.hessian(i, j)[a] * nu[a]).sum());
    let l: DMatrix<f64> = g.clone().cholesky().unwrap().l();
    let li = l.try_inverse().unwrap();
    let sym: DMatrix<f64> = &li * &h * li.transpose();
    let eig = SymmetricEigen::new(sym).eigenvalues;
    (eig.iter().copied().collect(), nu, g, h)
}

