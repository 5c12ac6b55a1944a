//! Product quadrature on the unit sphere `S^{n−1} ⊂ ℝ^n` and Gauss rules on intervals.
//!
//! Hyperspherical angles `θ_1 … θ_{n−2} ∈ [0, π]`, `φ ∈ [0, 2π)`. Each polar
//! angle is integrated in `t = cos θ_k` against its exact weight
//! `(1 − t²)^{(m_k − 1)/2}`, `m_k = n − 1 − k`, with a Gauss–Gegenbauer rule
//! (Gauss–Legendre when `m_k = 1`), and `φ` with the trapezoid rule on `2N`
//! points. With `N` nodes per angle the rule integrates every polynomial of
//! degree `≤ 2N − 1` exactly.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::summation::NeumaierSum;

/// `∫_0^π sin^m θ dθ`.
fn wallis(m: usize) -> f64 {
    let mut w = if m % 2 == 0 { std::f64::consts::PI } else { 2.0 };
    let mut k = if m % 2 == 0 { 2 } else { 3 };
    while k <= m {
        w *= (k - 1) as f64 / k as f64;
        k += 2;
    }
    w
}

/// Surface measure `ω_{n−1} = 2π^{n/2}/Γ(n/2)` of the unit sphere in `ℝ^n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    // ω_0 = 2 (two points), ω_1 = 2π, ω_k = 2π/(k−1) · ω_{k−2}.
    let k = n - 1;
    let (mut w, mut j) = if k % 2 == 0 { (2.0, 0) } else { (2.0 * PI, 1) };
    while j + 2 <= k {
        j += 2;
        w *= 2.0 * PI / (j - 1) as f64;
    }
    w
}

/// Gauss rule for the weight `(1 − t²)^{λ − ½}` on `[−1, 1]` (Golub–Welsch).
pub fn gauss_gegenbauer(npts: usize, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(npts > 0 && lambda > -0.5);
    let m = 2.0 * lambda;
    let mu0 = if (m - m.round()).abs() < 1e-14 && m.round() >= 0.0 {
        wallis(m.round() as usize)
    } else {
        panic!("gauss_gegenbauer: only half-integer λ is supported");
    };
    let mut jac = DMatrix::<f64>::zeros(npts, npts);
    for k in 1..npts {
        let kf = k as f64;
        let beta = kf * (kf + 2.0 * lambda - 1.0) / (4.0 * (kf + lambda) * (kf + lambda - 1.0));
        let off = beta.sqrt();
        jac[(k, k - 1)] = off;
        jac[(k - 1, k)] = off;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..npts)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

pub fn gauss_legendre(npts: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_gegenbauer(npts, 0.5)
}

/// Unit-sphere directions and positive weights summing to `ω_{n−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereQuadrature {
    dim: usize,
    nodes_per_angle: usize,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl SphereQuadrature {
    pub fn new(dim: usize, nodes_per_angle: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Contract("sphere quadrature needs n ≥ 2".into()));
        }
        if nodes_per_angle == 0 {
            return Err(Error::Contract("nodes per angle must be positive".into()));
        }
        let npolar = dim - 2;
        let rules: Vec<(Vec<f64>, Vec<f64>)> = (1..=npolar)
            .map(|k| gauss_gegenbauer(nodes_per_angle, (dim - 1 - k) as f64 / 2.0))
            .collect();
        let nphi = 2 * nodes_per_angle;
        let dphi = 2.0 * std::f64::consts::PI / nphi as f64;
        let total = nodes_per_angle.pow(npolar as u32) * nphi;
        let mut nodes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; npolar];
        loop {
            let mut x = vec![0.0; dim];
            let mut s = 1.0;
            let mut w = dphi;
            for (k, rule) in rules.iter().enumerate() {
                let t = rule.0[idx[k]];
                w *= rule.1[idx[k]];
                x[k] = s * t;
                s *= (1.0 - t * t).max(0.0).sqrt();
            }
            for j in 0..nphi {
                let phi = (j as f64 + 0.5) * dphi;
                let mut y = x.clone();
                y[dim - 2] = s * phi.cos();
                y[dim - 1] = s * phi.sin();
                nodes.push(y);
                weights.push(w);
            }
            let mut k = 0;
            while k < npolar {
                idx[k] += 1;
                if idx[k] < nodes_per_angle {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == npolar {
                break;
            }
        }
        Ok(SphereQuadrature {
            dim,
            nodes_per_angle,
            nodes,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes_per_angle(&self) -> usize {
        self.nodes_per_angle
    }

    /// Highest total polynomial degree integrated exactly.
    pub fn exactness(&self) -> usize {
        2 * self.nodes_per_angle - 1
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_{S^{n−1}} f dΩ` (sequential, compensated).
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(x))
            .collect::<NeumaierSum>()
            .total()
    }
}
