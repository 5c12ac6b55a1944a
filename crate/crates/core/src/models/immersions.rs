use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::extrinsic::{ImmersionFormula, ImmersionSample};
use crate::jet::Scalar;

fn radius2<S: Scalar>(x: &[S]) -> S {
    x.iter().fold(S::cst(0.0), |acc, c| acc + *c * *c)
}

/// Sample of `ψ = (A(ρ) x, u(ρ))` from the radial profiles `(A, A', A'')`, `(u, u', u'')`.
fn radial_graph_sample(x: &[f64], a: [f64; 3], u: [f64; 3]) -> ImmersionSample {
    let n = x.len();
    let d = n + 1;
    let rho = crate::linalg::norm(x);
    let mut s = ImmersionSample {
        dim: n,
        ambient: d,
        psi: x.iter().map(|c| a[0] * c).chain(std::iter::once(u[0])).collect(),
        dpsi: vec![0.0; n * d],
        ddpsi: vec![0.0; n * n * d],
    };
    let kd = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    for i in 0..n {
        for al in 0..n {
            s.dpsi[i * d + al] = a[1] * x[i] * x[al] / rho + a[0] * kd(i, al);
        }
        s.dpsi[i * d + n] = u[1] * x[i] / rho;
        for j in 0..n {
            let xx = x[i] * x[j] / (rho * rho);
            let radial = |f: [f64; 3]| f[2] * xx + f[1] * (kd(i, j) - xx) / rho;
            for al in 0..n {
                s.ddpsi[(i * n + j) * d + al] = radial(a) * x[al] + a[1] * (x[j] * kd(i, al) + x[i] * kd(j, al)) / rho;
            }
            s.ddpsi[(i * n + j) * d + n] = radial(u);
        }
    }
    s
}

/// `ψ(x) = (x, 0) ∈ ℝ^d`.
#[derive(Debug, Clone)]
pub struct FlatInclusion {
    pub n: usize,
    pub d: usize,
}

impl ImmersionFormula for FlatInclusion {
    fn name(&self) -> String {
        format!("flat-inclusion(n={}, d={})", self.n, self.d)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn ambient_dim(&self) -> usize {
        self.d
    }
    fn rho_min(&self) -> f64 {
        0.0
    }
    fn decay_order(&self) -> f64 {
        1.0
    }
    fn map<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let mut out = x.to_vec();
        out.resize(self.d, S::cst(0.0));
        out
    }
}

/// Rotational graph in `ℝ^{n+1}` whose induced metric is isotropic Schwarzschild:
/// `ψ = (x (1 + m/(2ρ^{n−2}))^{2/(n−2)}, u(ρ))`, one sheet from the horizon outwards.
#[derive(Debug, Clone)]
pub struct SchwarzschildGraph {
    pub n: usize,
    pub m: f64,
}

impl SchwarzschildGraph {
    pub fn horizon(&self) -> f64 {
        (self.m / 2.0).powf(1.0 / (self.n - 2) as f64)
    }

    fn profiles(&self, rho: f64) -> ([f64; 3], [f64; 3]) {
        let m = self.m;
        match self.n {
            3 => {
                let b = 1.0 + m / (2.0 * rho);
                let db = -m / (2.0 * rho * rho);
                let ddb = m / (rho * rho * rho);
                let k = (8.0 * m).sqrt();
                (
                    [b * b, 2.0 * b * db, 2.0 * db * db + 2.0 * b * ddb],
                    [
                        k * (rho.sqrt() - m / (2.0 * rho.sqrt())),
                        k * (0.5 / rho.sqrt() + m / (4.0 * rho.powf(1.5))),
                        k * (-0.25 / rho.powf(1.5) - 3.0 * m / (8.0 * rho.powf(2.5))),
                    ],
                )
            }
            _ => {
                let k = (2.0 * m).sqrt();
                (
                    [1.0 + m / (2.0 * rho * rho), -m / rho.powi(3), 3.0 * m / rho.powi(4)],
                    [k * (rho * (2.0 / m).sqrt()).ln(), k / rho, -k / (rho * rho)],
                )
            }
        }
    }
}

impl ImmersionFormula for SchwarzschildGraph {
    fn name(&self) -> String {
        format!("schwarzschild-graph(n={}, m={})", self.n, self.m)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn ambient_dim(&self) -> usize {
        self.n + 1
    }
    fn rho_min(&self) -> f64 {
        self.horizon()
    }
    fn decay_order(&self) -> f64 {
        (self.n - 2) as f64
    }
    fn map<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let m = self.m;
        let r2 = radius2(x);
        let (a, u) = match self.n {
            3 => {
                let rho = r2.sqrt();
                let b = rho.recip() * (m / 2.0) + 1.0;
                let sq = rho.sqrt();
                (b * b, (sq - sq.recip() * (m / 2.0)) * (8.0 * m).sqrt())
            }
            _ => (
                r2.recip() * (m / 2.0) + 1.0,
                (r2.ln() * 0.5 + 0.5 * (2.0 / m).ln()) * (2.0 * m).sqrt(),
            ),
        };
        let mut out: Vec<S> = x.iter().map(|c| *c * a).collect();
        out.push(u);
        out
    }
    fn analytic_sample(&self, x: &[f64]) -> Option<ImmersionSample> {
        let (a, u) = self.profiles(crate::linalg::norm(x));
        Some(radial_graph_sample(x, a, u))
    }
}

/// Graph of `A exp(−1/(1 − ρ²/R²))` inside `ρ < R`, flat outside.
#[derive(Debug, Clone)]
pub struct BumpGraph {
    pub n: usize,
    pub amplitude: f64,
    pub support: f64,
}

impl ImmersionFormula for BumpGraph {
    fn name(&self) -> String {
        format!("bump-graph(n={}, A={}, R={})", self.n, self.amplitude, self.support)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn ambient_dim(&self) -> usize {
        self.n + 1
    }
    fn rho_min(&self) -> f64 {
        0.0
    }
    fn decay_order(&self) -> f64 {
        1.0
    }
    fn map<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let s2 = radius2(x) / (self.support * self.support);
        let u = if s2.value() < 1.0 {
            ((S::cst(1.0) - s2).recip() * -1.0).exp() * self.amplitude
        } else {
            S::cst(0.0)
        };
        let mut out = x.to_vec();
        out.push(u);
        out
    }
}

/// `ψ = (x, c₁(1+ρ²)^{(1−σ₁)/2}, c₂ x₁ (1+ρ²)^{−σ₂/2})` in `ℝ^{n+2}`.
#[derive(Debug, Clone)]
pub struct Codim2Graph {
    pub n: usize,
    pub c1: f64,
    pub sigma1: f64,
    pub c2: f64,
    pub sigma2: f64,
}

impl ImmersionFormula for Codim2Graph {
    fn name(&self) -> String {
        format!(
            "codim2-graph(n={}, c1={}, s1={}, c2={}, s2={})",
            self.n, self.c1, self.sigma1, self.c2, self.sigma2
        )
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn ambient_dim(&self) -> usize {
        self.n + 2
    }
    fn rho_min(&self) -> f64 {
        0.0
    }
    fn decay_order(&self) -> f64 {
        let s1 = if self.c1 != 0.0 { self.sigma1 } else { f64::INFINITY };
        let s2 = if self.c2 != 0.0 { self.sigma2 } else { f64::INFINITY };
        let s = s1.min(s2);
        if s.is_finite() {
            2.0 * s
        } else {
            1.0
        }
    }
    fn map<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let w = radius2(x) + 1.0;
        let u1 = w.powf((1.0 - self.sigma1) / 2.0) * self.c1;
        let u2 = x[0] * w.powf(-self.sigma2 / 2.0) * self.c2;
        let mut out = x.to_vec();
        out.push(u1);
        out.push(u2);
        out
    }
}

/// Stereographic patch of the round sphere of radius `r` in `ℝ^{n+1}`.
#[derive(Debug, Clone)]
pub struct StereographicSphere {
    pub n: usize,
    pub r: f64,
}

impl ImmersionFormula for StereographicSphere {
    fn name(&self) -> String {
        format!("sphere-immersion(n={}, r={})", self.n, self.r)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn ambient_dim(&self) -> usize {
        self.n + 1
    }
    fn rho_min(&self) -> f64 {
        0.0
    }
    fn decay_order(&self) -> f64 {
        0.0
    }
    fn map<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let y2 = radius2(x) / (self.r * self.r);
        let inv = (y2 + 1.0).recip();
        let mut out: Vec<S> = x.iter().map(|c| *c * inv * 2.0).collect();
        out.push((y2 - 1.0) * inv * self.r);
        out
    }
}

/// `u = k √(1+ρ²)`: asymptotically a cone, so not asymptotically Euclidean.
#[derive(Debug, Clone)]
pub struct ConeGraph {
    pub n: usize,
    pub slope: f64,
    pub tau: f64,
}

impl ImmersionFormula for ConeGraph {
    fn name(&self) -> String {
        format!("cone-graph(n={}, slope={})", self.n, self.slope)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn ambient_dim(&self) -> usize {
        self.n + 1
    }
    fn rho_min(&self) -> f64 {
        0.0
    }
    fn decay_order(&self) -> f64 {
        self.tau
    }
    fn map<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let mut out = x.to_vec();
        out.push((radius2(x) + 1.0).sqrt() * self.slope);
        out
    }
}

/// Graph of seeded random cubic polynomials `u_1 … u_k`.
#[derive(Debug, Clone)]
pub struct RandomPolyGraph {
    pub n: usize,
    pub codim: usize,
    pub scale: f64,
    pub seed: u64,
    coeffs: Vec<Vec<f64>>,
}

impl RandomPolyGraph {
    pub fn new(n: usize, codim: usize, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = n + n * n + n * n * n;
        let coeffs = (0..codim)
            .map(|_| (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        RandomPolyGraph {
            n,
            codim,
            scale,
            seed,
            coeffs,
        }
    }
}

impl ImmersionFormula for RandomPolyGraph {
    fn name(&self) -> String {
        format!("random-graph(n={}, codim={}, seed={})", self.n, self.codim, self.seed)
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn ambient_dim(&self) -> usize {
        self.n + self.codim
    }
    fn rho_min(&self) -> f64 {
        0.0
    }
    fn decay_order(&self) -> f64 {
        0.0
    }
    fn map<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.n;
        let mut out = x.to_vec();
        for c in &self.coeffs {
            let mut u = S::cst(0.0);
            for i in 0..n {
                u = u + x[i] * c[i];
                for j in 0..n {
                    let xij = x[i] * x[j];
                    u = u + xij * (0.5 * c[n + i * n + j]);
                    for k in 0..n {
                        u = u + xij * x[k] * (c[n + n * n + (i * n + j) * n + k] / 6.0);
                    }
                }
            }
            out.push(u * self.scale);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extrinsic::ImmersionModel;

    fn close(a: &ImmersionSample, b: &ImmersionSample, tol: f64) {
        for (p, q) in a.psi.iter().chain(&a.dpsi).chain(&a.ddpsi).zip(b.psi.iter().chain(&b.dpsi).chain(&b.ddpsi)) {
            assert!((p - q).abs() < tol * (1.0 + q.abs()), "{p} vs {q}");
        }
    }

    #[test]
    fn schwarzschild_graph_profiles_match_jets() {
        for n in [3, 4] {
            let g = SchwarzschildGraph { n, m: 1.0 };
            let x: Vec<f64> = (0..n).map(|i| 0.9 + 0.4 * i as f64).collect();
            close(&ImmersionModel::analytic_sample(&g, &x).unwrap(), &g.sample(&x), 1e-13);
        }
    }

    #[test]
    fn schwarzschild_graph_induces_isotropic_schwarzschild() {
        for n in [3, 4] {
            let m = 1.0;
            let g = SchwarzschildGraph { n, m };
            let x: Vec<f64> = (0..n).map(|i| 1.1 + 0.3 * i as f64).collect();
            let rho = crate::linalg::norm(&x);
            let phi = (1.0 + m / (2.0 * rho.powi(n as i32 - 2))).powf(4.0 / (n - 2) as f64);
            let s = g.induced_sample(&x);
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { phi } else { 0.0 };
                    assert!((s.g[i * n + j] - want).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn bump_is_flat_outside_its_support() {
        let b = BumpGraph {
            n: 3,
            amplitude: 1.0,
            support: 2.0,
        };
        let s = b.sample(&[1.5, 1.5, 0.0]);
        assert_eq!(s.psi[3], 0.0);
        assert!(s.ddpsi.iter().skip(3).step_by(4).all(|v| *v == 0.0));
    }
}
