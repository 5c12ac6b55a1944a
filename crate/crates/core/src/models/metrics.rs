use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::intrinsic::{MetricFormula, MetricSample};
use crate::jet::Scalar;

fn radius2<S: Scalar>(x: &[S]) -> S {
    x.iter().fold(S::cst(0.0), |acc, c| acc + *c * *c)
}

fn conformal<S: Scalar>(n: usize, factor: S) -> Vec<S> {
    (0..n * n)
        .map(|ij| if ij / n == ij % n { factor } else { S::cst(0.0) })
        .collect()
}

/// `g = Φ(ρ) δ` sampled from the radial profile `(Φ, Φ', Φ'')`.
fn radial_conformal_sample(x: &[f64], phi: [f64; 3]) -> MetricSample {
    let n = x.len();
    let rho = crate::linalg::norm(x);
    let mut s = MetricSample {
        dim: n,
        g: vec![0.0; n * n],
        dg: vec![0.0; n * n * n],
        ddg: vec![0.0; n.pow(4)],
    };
    for i in 0..n {
        s.g[i * n + i] = phi[0];
        for k in 0..n {
            s.dg[(k * n + i) * n + i] = phi[1] * x[k] / rho;
            for l in 0..n {
                let delta = if k == l { 1.0 } else { 0.0 };
                let xx = x[k] * x[l] / (rho * rho);
                s.ddg[((k * n + l) * n + i) * n + i] = phi[2] * xx + phi[1] * (delta - xx) / rho;
            }
        }
    }
    s
}

#[derive(Debug, Clone)]
pub struct Flat {
    pub n: usize,
    pub tau: f64,
}

impl MetricFormula for Flat {
    fn name(&self) -> String {
        format!("flat(n={})", self.n)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn rho_min(&self) -> f64 {
        0.0
    }
    fn decay_order(&self) -> f64 {
        self.tau
    }
    fn components<S: Scalar>(&self, _x: &[S]) -> Vec<S> {
        conformal(self.n, S::cst(1.0))
    }
}

/// Isotropic Schwarzschild: `(1 + m/(2ρ^{n−2}))^{4/(n−2)} δ`.
#[derive(Debug, Clone)]
pub struct Schwarzschild {
    pub n: usize,
    pub m: f64,
    pub rho_min: f64,
}

impl Schwarzschild {
    /// `(Φ, Φ', Φ'')` at radius `ρ`.
    pub fn profile(&self, rho: f64) -> [f64; 3] {
        let k = (self.n - 2) as f64;
        let e = 4.0 / k;
        let phi = 1.0 + self.m / (2.0 * rho.powf(k));
        let dphi = -k * self.m / (2.0 * rho.powf(k + 1.0));
        let ddphi = k * (k + 1.0) * self.m / (2.0 * rho.powf(k + 2.0));
        [
            phi.powf(e),
            e * phi.powf(e - 1.0) * dphi,
            e * (e - 1.0) * phi.powf(e - 2.0) * dphi * dphi + e * phi.powf(e - 1.0) * ddphi,
        ]
    }
}

impl MetricFormula for Schwarzschild {
    fn name(&self) -> String {
        format!("schwarzschild(n={}, m={})", self.n, self.m)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn rho_min(&self) -> f64 {
        self.rho_min
    }
    fn decay_order(&self) -> f64 {
        (self.n - 2) as f64
    }
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let k = (self.n - 2) as f64;
        let phi = radius2(x).powf(-k / 2.0) * (self.m / 2.0) + 1.0;
        conformal(self.n, phi.powf(4.0 / k))
    }
    fn analytic_sample(&self, x: &[f64]) -> Option<MetricSample> {
        Some(radial_conformal_sample(x, self.profile(crate::linalg::norm(x))))
    }
}

/// `g = u^{4/(n−2)} δ` with `u = 1 + m/(2ρ^{n−2}) + ⟨d, x⟩/ρ^n + c (1+ρ²)^{−p/2}`.
#[derive(Debug, Clone)]
pub struct ConformallyFlat {
    pub n: usize,
    pub m: f64,
    pub dipole: Vec<f64>,
    pub c: f64,
    pub p: f64,
    pub rho_min: f64,
}

impl MetricFormula for ConformallyFlat {
    fn name(&self) -> String {
        format!("conformally-flat(n={}, m={}, c={}, p={})", self.n, self.m, self.c, self.p)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn rho_min(&self) -> f64 {
        self.rho_min
    }
    fn decay_order(&self) -> f64 {
        let mut tau = f64::INFINITY;
        if self.m != 0.0 {
            tau = tau.min((self.n - 2) as f64);
        }
        if self.dipole.iter().any(|d| *d != 0.0) {
            tau = tau.min((self.n - 1) as f64);
        }
        if self.c != 0.0 {
            tau = tau.min(self.p);
        }
        if tau.is_finite() {
            tau
        } else {
            (self.n - 2) as f64
        }
    }
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.n;
        let r2 = radius2(x);
        let mut u = r2.powf(-((n - 2) as f64) / 2.0) * (self.m / 2.0) + 1.0;
        let mut dot = S::cst(0.0);
        for (xi, di) in x.iter().zip(&self.dipole) {
            dot = dot + *xi * *di;
        }
        u = u + dot * r2.powf(-(n as f64) / 2.0);
        u = u + (r2 + 1.0).powf(-self.p / 2.0) * self.c;
        conformal(n, u.powf(4.0 / (n - 2) as f64))
    }
}

/// Stereographic chart of the round sphere of radius `r`: `4/(1+|x|²/r²)² δ`.
#[derive(Debug, Clone)]
pub struct SpherePatch {
    pub n: usize,
    pub r: f64,
}

impl MetricFormula for SpherePatch {
    fn name(&self) -> String {
        format!("sphere-patch(n={}, r={})", self.n, self.r)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn rho_min(&self) -> f64 {
        0.0
    }
    fn decay_order(&self) -> f64 {
        0.0
    }
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let f = (radius2(x) / (self.r * self.r) + 1.0).powi(-2) * 4.0;
        conformal(self.n, f)
    }
}

/// `g = δ + ε P(x)` with `P` a seeded random symmetric quadratic polynomial.
#[derive(Debug, Clone)]
pub struct PolynomialPerturbation {
    pub n: usize,
    pub eps: f64,
    pub seed: u64,
    // Per component ij: constant, linear (n), quadratic (n×n) coefficients.
    coeffs: Vec<Vec<f64>>,
}

impl PolynomialPerturbation {
    pub fn new(n: usize, eps: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = 1 + n + n * n;
        let mut coeffs = vec![vec![]; n * n];
        for i in 0..n {
            for j in i..n {
                let c: Vec<f64> = (0..len)
                    .map(|k| {
                        let scale = if k == 0 {
                            1.0
                        } else if k <= n {
                            1.0 / n as f64
                        } else {
                            1.0 / (n * n) as f64
                        };
                        scale * rng.gen_range(-1.0..1.0)
                    })
                    .collect();
                coeffs[i * n + j] = c.clone();
                coeffs[j * n + i] = c;
            }
        }
        PolynomialPerturbation { n, eps, seed, coeffs }
    }
}

impl MetricFormula for PolynomialPerturbation {
    fn name(&self) -> String {
        format!("poly-perturbation(n={}, eps={}, seed={})", self.n, self.eps, self.seed)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn rho_min(&self) -> f64 {
        0.0
    }
    fn decay_order(&self) -> f64 {
        0.0
    }
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.n;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(ij, c)| {
                let mut p = S::cst(c[0]);
                for k in 0..n {
                    p = p + x[k] * c[1 + k];
                    for l in 0..n {
                        p = p + x[k] * x[l] * c[1 + n + k * n + l];
                    }
                }
                let base = if ij / n == ij % n { 1.0 } else { 0.0 };
                p * self.eps + base
            })
            .collect()
    }
}

/// `g = (1 + ρ^{−s}) δ`: decays at rate `s` while claiming `tau`.
#[derive(Debug, Clone)]
pub struct SlowDecay {
    pub n: usize,
    pub s: f64,
    pub tau: f64,
}

impl MetricFormula for SlowDecay {
    fn name(&self) -> String {
        format!("slow-decay(n={}, s={}, claimed tau={})", self.n, self.s, self.tau)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn rho_min(&self) -> f64 {
        1.0
    }
    fn decay_order(&self) -> f64 {
        self.tau
    }
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        conformal(self.n, radius2(x).powf(-self.s / 2.0) + 1.0)
    }
}

/// Pull-back of a metric through `x = R x' + c` with `R` orthogonal.
#[derive(Debug, Clone)]
pub struct Recharted<F> {
    pub inner: F,
    rot: Vec<f64>,
    shift: Vec<f64>,
}

impl<F: MetricFormula> Recharted<F> {
    /// Rotation by `angle` in the (0,1) plane followed by `angle/2` in the (1,2) plane.
    pub fn new(inner: F, angle: f64, shift: Vec<f64>) -> Self {
        let n = inner.dim();
        let plane = |a: usize, b: usize, t: f64| {
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                m[i * n + i] = 1.0;
            }
            m[a * n + a] = t.cos();
            m[b * n + b] = t.cos();
            m[a * n + b] = -t.sin();
            m[b * n + a] = t.sin();
            m
        };
        let r1 = plane(0, 1, angle);
        let r2 = if n > 2 { plane(1, 2, angle / 2.0) } else { plane(0, 1, 0.0) };
        let mut rot = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                rot[i * n + j] = (0..n).map(|k| r2[i * n + k] * r1[k * n + j]).sum();
            }
        }
        let mut shift = shift;
        shift.resize(n, 0.0);
        Recharted { inner, rot, shift }
    }
}

impl<F: MetricFormula> MetricFormula for Recharted<F> {
    fn name(&self) -> String {
        format!("{} [recharted]", self.inner.name())
    }
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn rho_min(&self) -> f64 {
        self.inner.rho_min() + crate::linalg::norm(&self.shift)
    }
    fn decay_order(&self) -> f64 {
        self.inner.decay_order()
    }
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim();
        let y: Vec<S> = (0..n)
            .map(|i| {
                let mut acc = S::cst(self.shift[i]);
                for (j, xj) in x.iter().enumerate() {
                    acc = acc + *xj * self.rot[i * n + j];
                }
                acc
            })
            .collect();
        let g = self.inner.components(&y);
        let mut out = vec![S::cst(0.0); n * n];
        for a in 0..n {
            for b in 0..n {
                let mut acc = S::cst(0.0);
                for i in 0..n {
                    for j in 0..n {
                        let w = self.rot[i * n + a] * self.rot[j * n + b];
                        if w != 0.0 {
                            acc = acc + g[i * n + j] * w;
                        }
                    }
                }
                out[a * n + b] = acc;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intrinsic::MetricModel;

    #[test]
    fn analytic_schwarzschild_derivatives_match_jets() {
        for n in 3..=5 {
            let m = Schwarzschild { n, m: 1.3, rho_min: 1.0 };
            let x: Vec<f64> = (0..n).map(|i| 1.5 + 0.7 * i as f64).collect();
            let a = MetricModel::analytic_sample(&m, &x).unwrap();
            let j = m.sample(&x);
            for (p, q) in a.g.iter().chain(&a.dg).chain(&a.ddg).zip(j.g.iter().chain(&j.dg).chain(&j.ddg)) {
                assert!((p - q).abs() < 1e-13 * (1.0 + q.abs()), "n = {n}: {p} vs {q}");
            }
        }
    }

    #[test]
    fn recharting_preserves_the_metric_at_corresponding_points() {
        let inner = Schwarzschild { n: 3, m: 1.0, rho_min: 1.0 };
        let rc = Recharted::new(inner.clone(), 0.4, vec![0.3, -0.2, 0.1]);
        let xp = [4.0, 1.0, -2.0];
        let y: Vec<f64> = (0..3)
            .map(|i| rc.shift[i] + (0..3).map(|j| rc.rot[i * 3 + j] * xp[j]).sum::<f64>())
            .collect();
        let g = MetricModel::metric(&inner, &y);
        let gp = MetricModel::metric(&rc, &xp);
        // Conformally flat metrics are invariant under orthogonal changes of frame.
        for k in 0..9 {
            assert!((g[k] - gp[k]).abs() < 1e-14);
        }
    }
}
