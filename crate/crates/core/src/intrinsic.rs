//! Curvature of a metric given in a single exterior chart.
//!
//! Index conventions: `dg[k][i][j] = ∂_k g_ij`, `ddg[k][l][i][j] = ∂_k∂_l g_ij`,
//! `christoffel[k][i][j] = Γ^k_ij`. The covariant Riemann tensor is stored so
//! that a round sphere of curvature `K` has `R_ijkl = K (g_ik g_jl − g_il g_jk)`;
//! with that choice `g^{ik} g^{jl} R_ijkl` is the scalar curvature and
//! `R_ab^cd = g^{cc'} g^{dd'} R_abc'd'` is the mixed tensor fed to the
//! Lovelock contractions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};
use crate::linalg;
use crate::report::{loglog_slope, IdentityReport};
use crate::tensor::{self, DenseTensor, Slot, Symmetry};

/// Metric components and their first and second partials at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSample {
    pub dim: usize,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    pub ddg: Vec<f64>,
}

impl MetricSample {
    pub fn from_jets(n: usize, comps: &[Jet]) -> Self {
        let mut s = MetricSample {
            dim: n,
            g: vec![0.0; n * n],
            dg: vec![0.0; n * n * n],
            ddg: vec![0.0; n * n * n * n],
        };
        for i in 0..n {
            for j in 0..n {
                let c = &comps[i * n + j];
                s.g[i * n + j] = c.val();
                for k in 0..n {
                    s.dg[(k * n + i) * n + j] = c.d(k);
                    for l in 0..n {
                        s.ddg[((k * n + l) * n + i) * n + j] = c.dd(k, l);
                    }
                }
            }
        }
        s
    }

    #[inline]
    pub fn g(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.dim + j]
    }

    #[inline]
    pub fn dg(&self, k: usize, i: usize, j: usize) -> f64 {
        let n = self.dim;
        self.dg[(k * n + i) * n + j]
    }

    #[inline]
    pub fn ddg(&self, k: usize, l: usize, i: usize, j: usize) -> f64 {
        let n = self.dim;
        self.ddg[((k * n + l) * n + i) * n + j]
    }
}

/// A metric written as one generic formula; derivatives come from [`Jet`] evaluation.
pub trait MetricFormula: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    /// Chart domain is `{ρ ≥ rho_min}`.
    fn rho_min(&self) -> f64;
    /// Decay order τ the model claims.
    fn decay_order(&self) -> f64;
    /// Row-major `n × n` components at `x`.
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S>;
    /// Optional hand-coded derivatives, used to cross-check the dual-number path.
    fn analytic_sample(&self, _x: &[f64]) -> Option<MetricSample> {
        None
    }
}

/// Object-safe view of a metric model.
pub trait MetricModel: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn rho_min(&self) -> f64;
    fn decay_order(&self) -> f64;
    fn metric(&self, x: &[f64]) -> Vec<f64>;
    /// Components and partials via dual numbers.
    fn sample(&self, x: &[f64]) -> MetricSample;
    fn analytic_sample(&self, _x: &[f64]) -> Option<MetricSample> {
        None
    }
}

impl<F: MetricFormula> MetricModel for F {
    fn name(&self) -> String {
        MetricFormula::name(self)
    }
    fn dim(&self) -> usize {
        MetricFormula::dim(self)
    }
    fn rho_min(&self) -> f64 {
        MetricFormula::rho_min(self)
    }
    fn decay_order(&self) -> f64 {
        MetricFormula::decay_order(self)
    }
    fn metric(&self, x: &[f64]) -> Vec<f64> {
        self.components(x)
    }
    fn sample(&self, x: &[f64]) -> MetricSample {
        let jets = Jet::seed(x);
        MetricSample::from_jets(x.len(), &self.components(&jets))
    }
    fn analytic_sample(&self, x: &[f64]) -> Option<MetricSample> {
        MetricFormula::analytic_sample(self, x)
    }
}

/// Sign applied to the Riemann tensor. `Flipped` exists only as a negative control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RiemannSign {
    #[default]
    Standard,
    Flipped,
}

#[derive(Debug, Clone)]
pub struct CurvaturePoint {
    pub point: Vec<f64>,
    pub q: usize,
    pub metric: DenseTensor,
    pub metric_inverse: DenseTensor,
    pub sqrt_det: f64,
    /// `Γ^k_ij` at `[k][i][j]`.
    pub christoffel: Vec<f64>,
    pub riemann_low: DenseTensor,
    pub riemann_mixed: DenseTensor,
    pub ricci: DenseTensor,
    pub scalar: f64,
    pub einstein: DenseTensor,
    pub lovelock: DenseTensor,
    pub gauss_bonnet: f64,
}

impl CurvaturePoint {
    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    #[inline]
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        let n = self.dim();
        self.christoffel[(k * n + i) * n + j]
    }
}

/// Metric, inverse and Christoffel symbols; the cheap part of [`curvature_at`].
#[derive(Debug, Clone)]
pub struct Connection {
    pub dim: usize,
    pub g: Vec<f64>,
    pub ginv: Vec<f64>,
    pub sqrt_det: f64,
    pub gamma: Vec<f64>,
}

impl Connection {
    pub fn from_sample(s: &MetricSample) -> Result<Self> {
        let n = s.dim;
        let (ginv, det) = linalg::spd_inverse(&s.g, n)
            .ok_or_else(|| Error::Model("metric is not positive definite at the evaluated point".into()))?;
        let mut gamma = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut acc = 0.0;
                    for l in 0..n {
                        acc += ginv[k * n + l] * (s.dg(j, l, i) + s.dg(i, l, j) - s.dg(l, i, j));
                    }
                    gamma[(k * n + i) * n + j] = 0.5 * acc;
                    gamma[(k * n + j) * n + i] = 0.5 * acc;
                }
            }
        }
        Ok(Connection {
            dim: n,
            g: s.g.clone(),
            ginv,
            sqrt_det: det.sqrt(),
            gamma,
        })
    }

    #[inline]
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        let n = self.dim;
        self.gamma[(k * n + i) * n + j]
    }

    #[inline]
    pub fn ginv(&self, i: usize, j: usize) -> f64 {
        self.ginv[i * self.dim + j]
    }

    #[inline]
    pub fn g(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.dim + j]
    }

    /// `g^{jk}(∂_k W_j − Γ^l_kj W_l)` for a covector field with partials `dw[k][j]`.
    pub fn div_covector(&self, w: &[f64], dw: &[f64]) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for j in 0..n {
            for k in 0..n {
                let mut cov = dw[k * n + j];
                for l in 0..n {
                    cov -= self.gamma(l, k, j) * w[l];
                }
                acc += self.ginv(j, k) * cov;
            }
        }
        acc
    }

    /// `(div K)_j = g^{ik}(∂_k K_ij − Γ^l_ki K_lj − Γ^l_kj K_il)`, with `dk[k][i][j]`.
    pub fn div_sym2(&self, k2: &[f64], dk: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut out = vec![0.0; n];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..n {
                for k in 0..n {
                    let mut cov = dk[(k * n + i) * n + j];
                    for l in 0..n {
                        cov -= self.gamma(l, k, i) * k2[l * n + j] + self.gamma(l, k, j) * k2[i * n + l];
                    }
                    acc += self.ginv(i, k) * cov;
                }
            }
            *o = acc;
        }
        out
    }
}

fn sym2(n: usize, c: Vec<f64>, slot: Slot) -> DenseTensor {
    // Components come from symmetric formulas; symmetrize to strip roundoff.
    let mut s = c;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (s[i * n + j] + s[j * n + i]);
            s[i * n + j] = v;
            s[j * n + i] = v;
        }
    }
    DenseTensor::unchecked(n, vec![slot; 2], s, Symmetry::Symmetric2).expect("shape")
}

/// Metric, connection and both Riemann tensors at one point.
#[derive(Debug, Clone)]
pub struct RiemannPoint {
    pub connection: Connection,
    pub metric: DenseTensor,
    pub metric_inverse: DenseTensor,
    pub riemann_low: DenseTensor,
    pub riemann_mixed: DenseTensor,
}

pub fn riemann_from_sample(s: &MetricSample, sign: RiemannSign) -> Result<RiemannPoint> {
    let n = s.dim;
    let conn = Connection::from_sample(s)?;
    let flip = match sign {
        RiemannSign::Standard => 1.0,
        RiemannSign::Flipped => -1.0,
    };

    // Γ_{μ,bc} = g_μν Γ^ν_bc, lowered once.
    let mut gamma_low = vec![0.0; n * n * n];
    for m in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut acc = 0.0;
                for v in 0..n {
                    acc += s.g(m, v) * conn.gamma(v, b, c);
                }
                gamma_low[(m * n + b) * n + c] = acc;
            }
        }
    }
    let mut r = vec![0.0; n.pow(4)];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let second = 0.5 * (s.ddg(b, c, a, d) + s.ddg(a, d, b, c) - s.ddg(b, d, a, c) - s.ddg(a, c, b, d));
                    let mut quad = 0.0;
                    for m in 0..n {
                        quad += conn.gamma(m, b, c) * gamma_low[(m * n + a) * n + d]
                            - conn.gamma(m, b, d) * gamma_low[(m * n + a) * n + c];
                    }
                    r[((a * n + b) * n + c) * n + d] = flip * (second + quad);
                }
            }
        }
    }
    let riemann_low = DenseTensor::unchecked(n, vec![Slot::Lower; 4], r, Symmetry::Riemann4)?;
    let metric = sym2(n, s.g.clone(), Slot::Lower);
    let metric_inverse = sym2(n, conn.ginv.clone(), Slot::Upper);
    let raised = riemann_low
        .move_slot(2, &metric_inverse, Slot::Upper)?
        .move_slot(3, &metric_inverse, Slot::Upper)?;
    let riemann_mixed = DenseTensor::unchecked(n, raised.slots().to_vec(), raised.components().to_vec(), Symmetry::Riemann4)?;
    Ok(RiemannPoint {
        connection: conn,
        metric,
        metric_inverse,
        riemann_low,
        riemann_mixed,
    })
}

/// Full curvature pipeline from a metric sample.
pub fn curvature_from_sample(s: &MetricSample, point: &[f64], q: usize, sign: RiemannSign) -> Result<CurvaturePoint> {
    let n = s.dim;
    if 2 * q >= n {
        return Err(Error::Domain(format!("order q = {q} requires 2q < n = {n}")));
    }
    let RiemannPoint {
        connection: conn,
        metric,
        metric_inverse,
        riemann_low,
        riemann_mixed,
    } = riemann_from_sample(s, sign)?;

    let mut ric = vec![0.0; n * n];
    for b in 0..n {
        for d in 0..n {
            let mut acc = 0.0;
            for a in 0..n {
                for c in 0..n {
                    acc += conn.ginv(a, c) * riemann_low.at4(a, b, c, d);
                }
            }
            ric[b * n + d] = acc;
        }
    }
    let ricci = sym2(n, ric, Slot::Lower);
    let scalar = ricci.trace_with(&metric_inverse);
    let einstein: Vec<f64> = (0..n * n)
        .map(|ij| ricci.components()[ij] - 0.5 * scalar * s.g[ij])
        .collect();
    let einstein = sym2(n, einstein, Slot::Lower);
    let lovelock = tensor::lovelock_tensor(&riemann_mixed, &metric, q)?;
    let gauss_bonnet = tensor::gauss_bonnet_curvature(&riemann_mixed, q)?;

    Ok(CurvaturePoint {
        point: point.to_vec(),
        q,
        metric,
        metric_inverse,
        sqrt_det: conn.sqrt_det,
        christoffel: conn.gamma,
        riemann_low,
        riemann_mixed,
        ricci,
        scalar,
        einstein,
        lovelock,
        gauss_bonnet,
    })
}

pub fn check_in_domain(model: &dyn MetricModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.dim() {
        return Err(Error::Contract(format!(
            "point has {} coordinates, model dimension is {}",
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
    Ok(rho)
}

pub fn curvature_at(model: &dyn MetricModel, x: &[f64], q: usize) -> Result<CurvaturePoint> {
    curvature_at_with(model, x, q, RiemannSign::Standard)
}

pub fn curvature_at_with(model: &dyn MetricModel, x: &[f64], q: usize, sign: RiemannSign) -> Result<CurvaturePoint> {
    check_in_domain(model, x)?;
    curvature_from_sample(&model.sample(x), x, q, sign)
}

/// Central differences of a vector-valued field: returns `out[k][m] = ∂_k f_m`.
pub fn central_partials<F>(x: &[f64], h: f64, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let mut out = Vec::with_capacity(n);
    let mut xp = x.to_vec();
    for k in 0..n {
        xp[k] = x[k] + h;
        let fp = f(&xp)?;
        xp[k] = x[k] - h;
        let fm = f(&xp)?;
        xp[k] = x[k];
        out.push(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect());
    }
    Ok(out)
}

/// Rejects stencils that would leave the chart domain.
pub fn check_margin(model_rho_min: f64, x: &[f64], h: f64) -> Result<()> {
    let rho = linalg::norm(x);
    if !(h > 0.0) || rho - 2.0 * h < model_rho_min {
        return Err(Error::Domain(format!(
            "finite-difference step {h} needs ρ − 2h ≥ ρ_min = {model_rho_min} (ρ = {rho})"
        )));
    }
    Ok(())
}

/// `max_j |∇^i G_(q)ij|` with the outer derivative by central differences.
pub fn lovelock_divergence_residual(model: &dyn MetricModel, x: &[f64], q: usize, h: f64) -> Result<f64> {
    check_in_domain(model, x)?;
    check_margin(model.rho_min(), x, h)?;
    let n = x.len();
    let center = curvature_at(model, x, q)?;
    let conn = Connection::from_sample(&model.sample(x))?;
    let dg = central_partials(x, h, |p| Ok(curvature_at(model, p, q)?.lovelock.components().to_vec()))?;
    let mut dk = vec![0.0; n * n * n];
    for k in 0..n {
        dk[k * n * n..(k + 1) * n * n].copy_from_slice(&dg[k]);
    }
    let div = conn.div_sym2(center.lovelock.components(), &dk);
    Ok(div.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Deterministic probe directions on the unit sphere: axes, the diagonal and a few seeded draws.
pub fn probe_directions(n: usize, extra: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        dirs.push(e.clone());
        e[i] = -1.0;
        dirs.push(e);
    }
    dirs.push(vec![1.0 / (n as f64).sqrt(); n]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = linalg::norm(&v);
        if r > 1e-3 {
            dirs.push(v.iter().map(|c| c / r).collect());
        }
    }
    dirs
}

/// Maximum over `(i, j)` and the extra indices of a flattened array of `n×n` blocks.
fn max_dev(values: &[f64], subtract_identity: bool, n: usize) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(idx, v)| {
            let (i, j) = ((idx % (n * n)) / n, idx % n);
            if subtract_identity && i == j {
                (v - 1.0).abs()
            } else {
                v.abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Largest log–log growth rate tolerated for an indicator to count as bounded.
pub const BOUNDED_SLOPE_TOL: f64 = 0.1;

/// Judges a ladder of decay indicators; a flat or decreasing trend counts as bounded.
pub(crate) fn bounded_trend(radii: &[f64], values: &[f64]) -> (bool, f64) {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return (true, f64::NEG_INFINITY);
    }
    if values.iter().any(|v| *v == 0.0 || !v.is_finite()) {
        return (values.iter().all(|v| v.is_finite()), 0.0);
    }
    let k = radii.len().min(3);
    let slope = loglog_slope(&radii[radii.len() - k..], &values[values.len() - k..]);
    (slope <= BOUNDED_SLOPE_TOL, slope)
}

/// Checks `ρ^τ|g−δ|`, `ρ^{τ+1}|∂g|`, `ρ^{τ+2}|∂²g|` stay bounded along a radial ladder.
///
/// Boundedness over a finite ladder is judged by the log–log trend of each
/// indicator over the outermost rungs; this is a surrogate for the asymptotic
/// `O(ρ^{-τ})` condition and is labelled as such in the report.
pub fn ae_decay_check(model: &dyn MetricModel, radii: &[f64]) -> IdentityReport {
    ae_decay_check_with_order(model, model.decay_order(), radii)
}

pub fn ae_decay_check_with_order(model: &dyn MetricModel, tau: f64, radii: &[f64]) -> IdentityReport {
    let n = model.dim();
    let mut report = IdentityReport::new("ae-decay", model.name(), None, BOUNDED_SLOPE_TOL);
    report.note("boundedness judged by the log-log trend over the outermost ladder rungs (finite-ladder surrogate)");
    report.value("tau", tau);
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) {
        report.fail("radii must be an increasing ladder with at least two rungs");
        return report;
    }
    let dirs = probe_directions(n, 6, 0x5eed);
    let mut ind = [vec![], vec![], vec![]];
    for &rho in radii {
        let mut worst = [0.0f64; 3];
        for d in &dirs {
            let x: Vec<f64> = d.iter().map(|c| c * rho).collect();
            if rho < model.rho_min() {
                report.fail(format!("radius {rho} is outside the chart domain"));
                return report;
            }
            let s = model.sample(&x);
            worst[0] = worst[0].max(max_dev(&s.g, true, n));
            worst[1] = worst[1].max(max_dev(&s.dg, false, n));
            worst[2] = worst[2].max(max_dev(&s.ddg, false, n));
        }
        ind[0].push(rho.powf(tau) * worst[0]);
        ind[1].push(rho.powf(tau + 1.0) * worst[1]);
        ind[2].push(rho.powf(tau + 2.0) * worst[2]);
    }
    for (label, series) in ["metric", "first-derivative", "second-derivative"].iter().zip(&ind) {
        let (ok, slope) = bounded_trend(radii, series);
        for (r, v) in radii.iter().zip(series) {
            report.value(format!("{label}@{r}"), *v);
        }
        report.value(format!("{label}-slope"), slope);
        report.samples.push(crate::report::SampleResidual {
            point: vec![],
            residual: slope.max(0.0),
        });
        report.max_residual = report.max_residual.max(slope);
        if !ok {
            report.fail(format!("{label} indicator grows along the ladder (log-log slope {slope:.3})"));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Stereographic round sphere of radius `r`: `4/(1+|x|²/r²)² δ`.
    struct Sphere {
        n: usize,
        r: f64,
    }

    impl MetricFormula for Sphere {
        fn name(&self) -> String {
            "sphere".into()
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
            let mut r2 = S::cst(0.0);
            for c in x {
                r2 = r2 + *c * *c;
            }
            let f = (r2 / (self.r * self.r) + 1.0).powi(-2) * 4.0;
            let n = self.n;
            (0..n * n)
                .map(|ij| if ij / n == ij % n { f } else { S::cst(0.0) })
                .collect()
        }
    }

    #[test]
    fn sphere_has_positive_constant_curvature() {
        let (n, r) = (4, 1.5);
        let cp = curvature_at(&Sphere { n, r }, &[0.3, -0.2, 0.1, 0.4], 1).unwrap();
        let expected = (n * (n - 1)) as f64 / (r * r);
        assert!((cp.scalar - expected).abs() < 1e-10, "{}", cp.scalar);
        assert!((cp.gauss_bonnet - expected).abs() < 1e-10);
        let k = 1.0 / (r * r);
        let g = &cp.metric;
        let want = k * (g.at2(0, 0) * g.at2(1, 1) - g.at2(0, 1) * g.at2(1, 0));
        assert!((cp.riemann_low.at4(0, 1, 0, 1) - want).abs() < 1e-10);
    }

    #[test]
    fn flipped_sign_negates_curvature() {
        let m = Sphere { n: 3, r: 1.0 };
        let a = curvature_at_with(&m, &[0.1, 0.2, 0.3], 1, RiemannSign::Standard).unwrap();
        let b = curvature_at_with(&m, &[0.1, 0.2, 0.3], 1, RiemannSign::Flipped).unwrap();
        assert!((a.scalar + b.scalar).abs() < 1e-12);
    }

    #[test]
    fn order_and_domain_errors() {
        let m = Sphere { n: 4, r: 1.0 };
        assert!(matches!(curvature_at(&m, &[0.1; 4], 2), Err(Error::Domain(_))));
        assert!(matches!(curvature_at(&m, &[0.1; 3], 1), Err(Error::Contract(_))));
        assert!(check_margin(1.0, &[1.5, 0.0], 0.3).is_err());
        assert!(check_margin(1.0, &[1.5, 0.0], 0.2).is_ok());
    }

    #[test]
    fn einstein_equals_first_lovelock() {
        let cp = curvature_at(&Sphere { n: 5, r: 2.0 }, &[0.3, 0.1, -0.7, 0.2, 0.5], 1).unwrap();
        assert!(cp.einstein.relative_distance(&cp.lovelock) < 1e-11);
    }
}
