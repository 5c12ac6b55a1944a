//! Extrinsic geometry of immersions `ψ: M^n → ℝ^d`.
//!
//! Normal-vector-valued quantities (the second fundamental form, odd mean
//! curvatures and odd Newton transformations) are stored in ambient
//! coordinates. For codimension one the normal is oriented so that its last
//! ambient component is positive, which fixes the sign of odd orders.

use crate::error::{Error, Result};
use crate::intrinsic::{
    central_partials, check_margin, curvature_at_with, Connection, MetricModel, MetricSample, RiemannSign,
};
use crate::jet::{Dual, Jet, Scalar};
use crate::linalg;
use crate::tensor::{AntisymContraction, DenseTensor, Slot, Symmetry};

/// `ψ`, `∂_iψ` at `[i][α]` and `∂_i∂_jψ` at `[i][j][α]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImmersionSample {
    pub dim: usize,
    pub ambient: usize,
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    pub ddpsi: Vec<f64>,
}

impl ImmersionSample {
    fn from_jets(n: usize, comps: &[Jet]) -> Self {
        let d = comps.len();
        let mut s = ImmersionSample {
            dim: n,
            ambient: d,
            psi: comps.iter().map(|c| c.val()).collect(),
            dpsi: vec![0.0; n * d],
            ddpsi: vec![0.0; n * n * d],
        };
        for (a, c) in comps.iter().enumerate() {
            for i in 0..n {
                s.dpsi[i * d + a] = c.d(i);
                for j in 0..n {
                    s.ddpsi[(i * n + j) * d + a] = c.dd(i, j);
                }
            }
        }
        s
    }

    pub fn tangent(&self, i: usize) -> &[f64] {
        &self.dpsi[i * self.ambient..(i + 1) * self.ambient]
    }

    pub fn hessian(&self, i: usize, j: usize) -> &[f64] {
        let d = self.ambient;
        let off = (i * self.dim + j) * d;
        &self.ddpsi[off..off + d]
    }
}

/// An immersion written as one generic formula.
pub trait ImmersionFormula: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn ambient_dim(&self) -> usize;
    fn rho_min(&self) -> f64;
    fn decay_order(&self) -> f64;
    fn map<S: Scalar>(&self, x: &[S]) -> Vec<S>;
    fn analytic_sample(&self, _x: &[f64]) -> Option<ImmersionSample> {
        None
    }
}

/// Object-safe view of an immersion.
pub trait ImmersionModel: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn ambient_dim(&self) -> usize;
    fn rho_min(&self) -> f64;
    fn decay_order(&self) -> f64;
    fn position(&self, x: &[f64]) -> Vec<f64>;
    fn sample(&self, x: &[f64]) -> ImmersionSample;
    /// Induced metric with first and second partials (needs third derivatives of `ψ`).
    fn induced_sample(&self, x: &[f64]) -> MetricSample;
    fn analytic_sample(&self, _x: &[f64]) -> Option<ImmersionSample> {
        None
    }
}

impl<F: ImmersionFormula> ImmersionModel for F {
    fn name(&self) -> String {
        ImmersionFormula::name(self)
    }
    fn dim(&self) -> usize {
        ImmersionFormula::dim(self)
    }
    fn ambient_dim(&self) -> usize {
        ImmersionFormula::ambient_dim(self)
    }
    fn rho_min(&self) -> f64 {
        ImmersionFormula::rho_min(self)
    }
    fn decay_order(&self) -> f64 {
        ImmersionFormula::decay_order(self)
    }
    fn position(&self, x: &[f64]) -> Vec<f64> {
        self.map(x)
    }
    fn sample(&self, x: &[f64]) -> ImmersionSample {
        ImmersionSample::from_jets(x.len(), &self.map(&Jet::seed(x)))
    }
    fn induced_sample(&self, x: &[f64]) -> MetricSample {
        let n = x.len();
        let base = Jet::seed(x);
        // Column i holds ∂_iψ^α as a jet in x.
        let cols: Vec<Vec<Jet>> = (0..n)
            .map(|i| {
                let xs: Vec<Dual<Jet>> = base
                    .iter()
                    .enumerate()
                    .map(|(k, j)| Dual::new(*j, Jet::constant(if k == i { 1.0 } else { 0.0 })))
                    .collect();
                self.map(&xs).into_iter().map(|c| c.eps).collect()
            })
            .collect();
        let mut comps = vec![Jet::constant(0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let mut acc = Jet::constant(0.0);
                for (a, b) in cols[i].iter().zip(&cols[j]) {
                    acc = acc + *a * *b;
                }
                comps[i * n + j] = acc;
                comps[j * n + i] = acc;
            }
        }
        MetricSample::from_jets(n, &comps)
    }
    fn analytic_sample(&self, x: &[f64]) -> Option<ImmersionSample> {
        ImmersionFormula::analytic_sample(self, x)
    }
}

/// The pull-back metric `ψ*δ̄` viewed as a metric model.
pub struct InducedMetric<'a>(pub &'a dyn ImmersionModel);

impl MetricModel for InducedMetric<'_> {
    fn name(&self) -> String {
        format!("induced({})", self.0.name())
    }
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn rho_min(&self) -> f64 {
        self.0.rho_min()
    }
    fn decay_order(&self) -> f64 {
        self.0.decay_order()
    }
    fn metric(&self, x: &[f64]) -> Vec<f64> {
        gram(&self.0.sample(x))
    }
    fn sample(&self, x: &[f64]) -> MetricSample {
        self.0.induced_sample(x)
    }
}

fn gram(s: &ImmersionSample) -> Vec<f64> {
    let n = s.dim;
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = linalg::dot(s.tangent(i), s.tangent(j));
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    g
}

#[derive(Debug, Clone)]
pub struct ExtrinsicPoint {
    pub point: Vec<f64>,
    pub dim: usize,
    pub ambient: usize,
    /// `Z̄ = ψ(x)`.
    pub position: Vec<f64>,
    /// `∂_iψ` at `[i][α]`.
    pub tangent: Vec<f64>,
    pub induced_metric: DenseTensor,
    pub metric_inverse: DenseTensor,
    pub sqrt_det: f64,
    /// `B_ij^α` at `[i][j][α]`.
    pub second_ff: Vec<f64>,
    pub normal_frame: Vec<Vec<f64>>,
    /// `½(⟨B_b1^a1, B_b2^a2⟩ − ⟨B_b1^a2, B_b2^a1⟩)` at `[b1][b2][a1][a2]`.
    pair: Vec<f64>,
    /// `B_b^a` for ambient component α at `[α][b][a]`.
    mixed: Vec<f64>,
}

/// Mean curvature and Newton transformation of one order. Even orders fill the
/// scalar/tensor fields, odd orders the ambient-vector fields.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanCurvatureSet {
    pub order: usize,
    pub value_even: Option<f64>,
    pub value_odd: Option<Vec<f64>>,
    pub newton_even: Option<DenseTensor>,
    /// `T_(p)ij^α` at `[i][j][α]`.
    pub newton_odd: Option<Vec<f64>>,
}

fn factorial(p: usize) -> f64 {
    (1..=p).map(|k| k as f64).product()
}

fn normal_frame(s: &ImmersionSample) -> Result<Vec<Vec<f64>>> {
    let (n, d) = (s.dim, s.ambient);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    let project_out = |v: &mut Vec<f64>, basis: &[Vec<f64>]| {
        // Two passes of modified Gram–Schmidt.
        for _ in 0..2 {
            for b in basis {
                let c = linalg::dot(v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
    };
    for i in 0..n {
        let mut v = s.tangent(i).to_vec();
        let scale = linalg::norm(&v);
        project_out(&mut v, &basis);
        let r = linalg::norm(&v);
        if !(r > 1e-12 * scale.max(1e-300)) {
            return Err(Error::Immersion("differential is rank deficient".into()));
        }
        basis.push(v.iter().map(|c| c / r).collect());
    }
    let mut normals = Vec::with_capacity(d - n);
    // Candidates from the last ambient axis backwards, so graph normals come out near e_d.
    for a in (0..d).rev() {
        if normals.len() == d - n {
            break;
        }
        let mut v = vec![0.0; d];
        v[a] = 1.0;
        project_out(&mut v, &basis);
        let r = linalg::norm(&v);
        if r > 0.1 {
            let v: Vec<f64> = v.iter().map(|c| c / r).collect();
            basis.push(v.clone());
            normals.push(v);
        }
    }
    if normals.len() != d - n {
        return Err(Error::Immersion("could not complete the normal frame".into()));
    }
    if d - n == 1 && normals[0][d - 1] < 0.0 {
        normals[0].iter_mut().for_each(|c| *c = -*c);
    }
    Ok(normals)
}

pub fn extrinsic_from_sample(s: &ImmersionSample, point: &[f64]) -> Result<ExtrinsicPoint> {
    let (n, d) = (s.dim, s.ambient);
    if d <= n {
        return Err(Error::Contract(format!("ambient dimension {d} must exceed {n}")));
    }
    let g = gram(s);
    let (ginv, det) = linalg::spd_inverse(&g, n)
        .ok_or_else(|| Error::Immersion("differential is rank deficient (Gram matrix not positive definite)".into()))?;
    let normals = normal_frame(s)?;
    // B_ij = Σ_ν ⟨∂_ijψ, ν⟩ ν; projecting onto the normal frame keeps B exactly normal.
    let mut b = vec![0.0; n * n * d];
    for i in 0..n {
        for j in i..n {
            let h = s.hessian(i, j);
            let mut v = vec![0.0; d];
            for nu in &normals {
                let c = linalg::dot(h, nu);
                v.iter_mut().zip(nu).for_each(|(x, y)| *x += c * y);
            }
            b[(i * n + j) * d..(i * n + j + 1) * d].copy_from_slice(&v);
            b[(j * n + i) * d..(j * n + i + 1) * d].copy_from_slice(&v);
        }
    }
    let mut mixed = vec![0.0; d * n * n];
    for a in 0..d {
        for bb in 0..n {
            for up in 0..n {
                let mut acc = 0.0;
                for c in 0..n {
                    acc += ginv[up * n + c] * b[(bb * n + c) * d + a];
                }
                mixed[(a * n + bb) * n + up] = acc;
            }
        }
    }
    let inner = |b1: usize, a1: usize, b2: usize, a2: usize| -> f64 {
        (0..d)
            .map(|a| mixed[(a * n + b1) * n + a1] * mixed[(a * n + b2) * n + a2])
            .sum()
    };
    let mut pair = vec![0.0; n.pow(4)];
    for b1 in 0..n {
        for b2 in 0..n {
            for a1 in 0..n {
                for a2 in 0..n {
                    pair[((b1 * n + b2) * n + a1) * n + a2] = 0.5 * (inner(b1, a1, b2, a2) - inner(b1, a2, b2, a1));
                }
            }
        }
    }
    let sym = |c: Vec<f64>, slot| DenseTensor::unchecked(n, vec![slot; 2], c, Symmetry::Symmetric2).expect("shape");
    Ok(ExtrinsicPoint {
        point: point.to_vec(),
        dim: n,
        ambient: d,
        position: s.psi.clone(),
        tangent: s.dpsi.clone(),
        induced_metric: sym(g, Slot::Lower),
        metric_inverse: sym(ginv, Slot::Upper),
        sqrt_det: det.sqrt(),
        second_ff: b,
        normal_frame: normals,
        pair,
        mixed,
    })
}

fn check_point(model: &dyn ImmersionModel, x: &[f64]) -> Result<()> {
    if x.len() != model.dim() {
        return Err(Error::Contract(format!(
            "point has {} coordinates, immersion dimension is {}",
            x.len(),
            model.dim()
        )));
    }
    let rho = linalg::norm(x);
    if rho < model.rho_min() {
        return Err(Error::Domain(format!(
            "ρ = {rho} lies below the chart domain ρ_min = {} of {}",
            model.rho_min(),
            model.name()
        )));
    }
    Ok(())
}

pub fn extrinsic_at(model: &dyn ImmersionModel, x: &[f64]) -> Result<ExtrinsicPoint> {
    check_point(model, x)?;
    extrinsic_from_sample(&model.sample(x), x)
}

impl ExtrinsicPoint {
    pub fn b(&self, i: usize, j: usize) -> &[f64] {
        let off = (i * self.dim + j) * self.ambient;
        &self.second_ff[off..off + self.ambient]
    }

    /// `max |⟨B_ij, ∂_kψ⟩|`.
    pub fn tangential_leak(&self) -> f64 {
        let (n, d) = (self.dim, self.ambient);
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max(linalg::dot(self.b(i, j), &self.tangent[k * d..(k + 1) * d]).abs());
                }
            }
        }
        worst
    }

    /// `Y = ψ*Z̄^⊤`, i.e. `Y^i = g^{ij}⟨∂_jψ, ψ⟩`.
    pub fn position_tangent(&self) -> Vec<f64> {
        let (n, d) = (self.dim, self.ambient);
        let w: Vec<f64> = (0..n)
            .map(|j| linalg::dot(&self.tangent[j * d..(j + 1) * d], &self.position))
            .collect();
        (0..n)
            .map(|i| (0..n).map(|j| self.metric_inverse.at2(i, j) * w[j]).sum())
            .collect()
    }

    fn single(&self, a: usize) -> &[f64] {
        let nn = self.dim * self.dim;
        &self.mixed[a * nn..(a + 1) * nn]
    }

    fn engine_eval(&self, npairs: usize, single: Option<&[f64]>, up: &[usize], lo: &[usize]) -> f64 {
        AntisymContraction::new(self.dim, &self.pair, npairs, single)
            .expect("extrinsic factors have consistent shapes")
            .eval(up, lo)
    }

    /// Even-order mean curvature `S_(p)`.
    pub fn s_even(&self, p: usize) -> f64 {
        debug_assert!(p % 2 == 0);
        if p == 0 {
            return 1.0;
        }
        self.engine_eval(p / 2, None, &[], &[]) / factorial(p)
    }

    /// Odd-order mean curvature vector `S_(p)` in ambient coordinates.
    pub fn s_odd(&self, p: usize) -> Vec<f64> {
        debug_assert!(p % 2 == 1);
        (0..self.ambient)
            .map(|a| self.engine_eval(p / 2, Some(self.single(a)), &[], &[]) / factorial(p))
            .collect()
    }

    fn lower_newton(&self, mixed: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                t[i * n + j] = (0..n).map(|k| self.induced_metric.at2(i, k) * mixed[k * n + j]).sum();
            }
        }
        t
    }

    /// Even-order Newton transformation `T_(p)ij`.
    pub fn t_even(&self, p: usize) -> DenseTensor {
        debug_assert!(p % 2 == 0);
        let n = self.dim;
        if p == 0 {
            return self.induced_metric.clone();
        }
        let mut m = vec![0.0; n * n];
        for k in 0..n {
            for j in 0..n {
                m[k * n + j] = self.engine_eval(p / 2, None, &[k], &[j]) / factorial(p);
            }
        }
        let mut t = self.lower_newton(&m);
        symmetrize(n, &mut t);
        DenseTensor::unchecked(n, vec![Slot::Lower; 2], t, Symmetry::Symmetric2).expect("shape")
    }

    /// Odd-order Newton transformation `T_(p)ij^α` at `[i][j][α]`.
    pub fn t_odd(&self, p: usize) -> Vec<f64> {
        debug_assert!(p % 2 == 1);
        let (n, d) = (self.dim, self.ambient);
        let mut out = vec![0.0; n * n * d];
        for a in 0..d {
            let mut m = vec![0.0; n * n];
            for k in 0..n {
                for j in 0..n {
                    m[k * n + j] = self.engine_eval(p / 2, Some(self.single(a)), &[k], &[j]) / factorial(p);
                }
            }
            let mut t = self.lower_newton(&m);
            symmetrize(n, &mut t);
            for ij in 0..n * n {
                out[ij * d + a] = t[ij];
            }
        }
        out
    }

    /// `⟨S_(p), Z̄⟩` for odd `p`.
    pub fn pairing(&self, p: usize) -> f64 {
        debug_assert!(p % 2 == 1);
        // S_(p) is linear in its single B factor, so contract ⟨B, Z̄⟩ once.
        let nn = self.dim * self.dim;
        let mut single = vec![0.0; nn];
        for (a, z) in self.position.iter().enumerate() {
            if *z != 0.0 {
                single.iter_mut().zip(self.single(a)).for_each(|(s, m)| *s += z * m);
            }
        }
        self.engine_eval(p / 2, Some(&single), &[], &[]) / factorial(p)
    }

    /// `B^{ij} = g^{ia} g^{jb} B_ab` at `[i][j][α]`.
    pub fn second_ff_raised(&self) -> Vec<f64> {
        let (n, d) = (self.dim, self.ambient);
        let gi = &self.metric_inverse;
        let mut out = vec![0.0; n * n * d];
        for i in 0..n {
            for j in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let w = gi.at2(i, a) * gi.at2(j, b);
                        if w == 0.0 {
                            continue;
                        }
                        let src = self.b(a, b);
                        for (o, s) in out[(i * n + j) * d..(i * n + j + 1) * d].iter_mut().zip(src) {
                            *o += w * s;
                        }
                    }
                }
            }
        }
        out
    }
}

fn symmetrize(n: usize, t: &mut [f64]) {
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (t[i * n + j] + t[j * n + i]);
            t[i * n + j] = v;
            t[j * n + i] = v;
        }
    }
}

fn check_order(ep: &ExtrinsicPoint, p: usize) -> Result<()> {
    if p > ep.dim + 1 {
        return Err(Error::Domain(format!("order p = {p} exceeds n + 1 = {}", ep.dim + 1)));
    }
    Ok(())
}

/// `S_(p)` for `0 ≤ p ≤ n+1`; `S_(n+1)` is zero.
pub fn mean_curvatures(ep: &ExtrinsicPoint, p: usize) -> Result<MeanCurvatureSet> {
    check_order(ep, p)?;
    let mut set = MeanCurvatureSet {
        order: p,
        value_even: None,
        value_odd: None,
        newton_even: None,
        newton_odd: None,
    };
    if p % 2 == 0 {
        set.value_even = Some(if p > ep.dim { 0.0 } else { ep.s_even(p) });
    } else {
        set.value_odd = Some(if p > ep.dim { vec![0.0; ep.ambient] } else { ep.s_odd(p) });
    }
    Ok(set)
}

/// `T_(p)` for `0 ≤ p ≤ n+1`; the contraction vanishes identically for `p > n`.
pub fn newton_transformation(ep: &ExtrinsicPoint, p: usize) -> Result<MeanCurvatureSet> {
    check_order(ep, p)?;
    let mut set = MeanCurvatureSet {
        order: p,
        value_even: None,
        value_odd: None,
        newton_even: None,
        newton_odd: None,
    };
    if p % 2 == 0 {
        set.newton_even = Some(ep.t_even(p));
    } else {
        set.newton_odd = Some(ep.t_odd(p));
    }
    Ok(set)
}

pub fn mean_curvature_set(ep: &ExtrinsicPoint, p: usize) -> Result<MeanCurvatureSet> {
    let mut s = mean_curvatures(ep, p)?;
    let t = newton_transformation(ep, p)?;
    s.newton_even = t.newton_even;
    s.newton_odd = t.newton_odd;
    Ok(s)
}

/// Relative gap between `G_(q)` of the induced metric and `−((2q)!/2) T_(2q)`.
pub fn gauss_relation_residual(model: &dyn ImmersionModel, x: &[f64], q: usize) -> Result<f64> {
    gauss_relation_residual_with(model, x, q, RiemannSign::Standard)
}

pub fn gauss_relation_residual_with(model: &dyn ImmersionModel, x: &[f64], q: usize, sign: RiemannSign) -> Result<f64> {
    let ep = extrinsic_at(model, x)?;
    let cp = curvature_at_with(&InducedMetric(model), x, q, sign)?;
    let t = ep.t_even(2 * q).scaled(-factorial(2 * q) / 2.0);
    Ok(cp.lovelock.relative_distance(&t))
}

/// `−((2q)!/2)[(n−2q) S_(2q) + (2q+1)⟨S_(2q+1), Z̄⟩]`.
pub fn divergence_identity_rhs(ep: &ExtrinsicPoint, q: usize) -> f64 {
    let n = ep.dim;
    let s_even = if 2 * q <= n { ep.s_even(2 * q) } else { 0.0 };
    let pair = if 2 * q < n { ep.pairing(2 * q + 1) } else { 0.0 };
    -factorial(2 * q) / 2.0 * ((n - 2 * q) as f64 * s_even + (2 * q + 1) as f64 * pair)
}

/// `|div_g(ι_Y G_(q)) − rhs|` with `Y = ψ*Z̄^⊤`; the outer derivative is a central difference.
pub fn divergence_identity_residual(model: &dyn ImmersionModel, x: &[f64], q: usize, h: f64) -> Result<f64> {
    check_point(model, x)?;
    check_margin(model.rho_min(), x, h)?;
    let n = x.len();
    let induced = InducedMetric(model);
    let w_at = |p: &[f64]| -> Result<Vec<f64>> {
        let cp = curvature_at_with(&induced, p, q, RiemannSign::Standard)?;
        let y = extrinsic_at(model, p)?.position_tangent();
        Ok((0..n)
            .map(|j| (0..n).map(|i| y[i] * cp.lovelock.at2(i, j)).sum())
            .collect())
    };
    let w = w_at(x)?;
    let dw = central_partials(x, h, w_at)?.concat();
    let conn = Connection::from_sample(&induced.sample(x))?;
    let lhs = conn.div_covector(&w, &dw);
    let rhs = divergence_identity_rhs(&extrinsic_at(model, x)?, q);
    Ok((lhs - rhs).abs())
}

/// `|div_g(ι_V K) − ι_V(div_g K) − ½ g(K, L_V g)|` with finite-difference outer derivatives.
pub fn pohozaev_schoen_residual(
    k: &dyn Fn(&[f64]) -> Vec<f64>,
    v: &dyn Fn(&[f64]) -> Vec<f64>,
    model: &dyn MetricModel,
    x: &[f64],
    h: f64,
) -> Result<f64> {
    if x.len() != model.dim() {
        return Err(Error::Contract("point dimension does not match the metric model".into()));
    }
    check_margin(model.rho_min(), x, h)?;
    let n = x.len();
    let s = model.sample(x);
    let conn = Connection::from_sample(&s)?;
    let kx = k(x);
    let vx = v(x);
    if kx.len() != n * n || vx.len() != n {
        return Err(Error::Contract("K must have n² and V n components".into()));
    }
    let iota = |p: &[f64]| -> Result<Vec<f64>> {
        let (kp, vp) = (k(p), v(p));
        Ok((0..n).map(|j| (0..n).map(|i| vp[i] * kp[i * n + j]).sum()).collect())
    };
    let w = iota(x)?;
    let dw = central_partials(x, h, iota)?.concat();
    let lhs = conn.div_covector(&w, &dw);

    let dk = central_partials(x, h, |p| Ok(k(p)))?.concat();
    let div_k = conn.div_sym2(&kx, &dk);
    let iota_div: f64 = vx.iter().zip(&div_k).map(|(a, b)| a * b).sum();

    // dv[a][c] = ∂_a V^c.
    let dv = central_partials(x, h, |p| Ok(v(p)))?.concat();
    let mut lie = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let mut acc = 0.0;
            for c in 0..n {
                acc += vx[c] * s.dg(c, a, b) + s.g(c, b) * dv[a * n + c] + s.g(a, c) * dv[b * n + c];
            }
            lie[a * n + b] = acc;
        }
    }
    let mut pairing = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    pairing += conn.ginv(a, c) * conn.ginv(b, d) * kx[a * n + b] * lie[c * n + d];
                }
            }
        }
    }
    Ok((lhs - iota_div - 0.5 * pairing).abs())
}
