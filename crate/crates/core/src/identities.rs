//! Randomized pointwise identity suite over a model.
//!
//! Algebraic identities are checked at seeded random points against relative
//! tolerances; identities that need a finite-difference divergence are judged
//! by their convergence order over a ladder of steps instead.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::extrinsic::{
    divergence_identity_residual, extrinsic_at, gauss_relation_residual_with, pohozaev_schoen_residual,
    ExtrinsicPoint, ImmersionModel,
};
use crate::intrinsic::{curvature_at_with, lovelock_divergence_residual, CurvaturePoint, MetricModel, RiemannSign};
use crate::models::{make_model, Model, ModelSpec};
use crate::report::{loglog_slope, IdentityReport};
use crate::summation::par_map;
use crate::tensor::{p_tensor, DenseTensor};

pub const TRACE_TOL: f64 = 1e-9;
pub const P_SYMMETRY_TOL: f64 = 1e-10;
pub const NEWTON_TOL: f64 = 1e-9;
pub const GAUSS_TOL: f64 = 1e-8;
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
pub const BIANCHI_TOL: f64 = 1e-9;
pub const EINSTEIN_TOL: f64 = 1e-11;
pub const TARGET_ORDER: f64 = 2.0;
pub const ORDER_BAND: f64 = 0.2;
/// Mean per-point residual treated as exact in the convergence-order checks.
pub const ROUNDOFF_FLOOR: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub points: usize,
    pub seed: u64,
    /// Finite-difference steps for the convergence-order checks.
    pub steps: Vec<f64>,
    /// Points used by the convergence-order checks (a prefix of the sample).
    pub convergence_points: usize,
    pub sign: RiemannSign,
    /// Orders to test; defaults to every `q ∈ {1, 2}` with `2q < n`.
    pub orders: Option<Vec<usize>>,
    pub convergence: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            points: 50,
            seed: 2024,
            steps: vec![1e-2, 5e-3, 2.5e-3],
            convergence_points: 50,
            sign: RiemannSign::Standard,
            orders: None,
            convergence: true,
        }
    }
}

/// Seeded points with uniform direction and radius uniform in `[lo, hi]`.
pub fn sample_points(n: usize, shell: (f64, f64), count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let r = crate::linalg::norm(&v);
            if r > 1e-6 {
                let rho = rng.gen_range(shell.0..=shell.1);
                break v.iter().map(|c| c * rho / r).collect();
            }
        })
        .collect()
}

fn orders_for(n: usize, cfg: &SuiteConfig) -> Vec<usize> {
    match &cfg.orders {
        Some(o) => o.iter().copied().filter(|q| *q >= 1 && 2 * q < n).collect(),
        None => (1..=2).filter(|q| 2 * q < n).collect(),
    }
}

/// Pushes one relative residual per point; evaluation errors count as failures.
fn pointwise<F>(report: &mut IdentityReport, points: &[Vec<f64>], f: F)
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let vals = par_map(points, |x| f(x));
    for (x, v) in points.iter().zip(vals) {
        match v {
            Ok(r) => report.push(x, r),
            Err(e) => {
                report.push(x, f64::NAN);
                report.note(format!("evaluation failed at {x:?}: {e}"));
            }
        }
    }
}

fn rel(diff: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Judges `Σ_points residual(h)` by its log–log slope against `h`.
fn convergence_order<F>(report: &mut IdentityReport, points: &[Vec<f64>], steps: &[f64], f: F)
where
    F: Fn(&[f64], f64) -> Result<f64> + Sync,
{
    let rows = par_map(points, |x| steps.iter().map(|h| f(x, *h)).collect::<Result<Vec<f64>>>());
    let mut totals = vec![0.0; steps.len()];
    for (x, row) in points.iter().zip(rows) {
        match row {
            Ok(r) => r.iter().zip(totals.iter_mut()).for_each(|(v, t)| *t += v),
            Err(e) => {
                report.fail(format!("evaluation failed at {x:?}: {e}"));
                totals.iter_mut().for_each(|t| *t = f64::NAN);
            }
        }
    }
    for (h, t) in steps.iter().zip(&totals) {
        report.value(format!("residual_sum@h={h}"), *t);
    }
    // Below this mean residual per point the identity holds to round-off and no order is measurable.
    let floor = ROUNDOFF_FLOOR * points.len().max(1) as f64;
    if totals.iter().all(|t| *t <= floor) {
        report.note("residual sits at round-off level at every step");
        return;
    }
    let order = loglog_slope(steps, &totals);
    report.value("order", order);
    report.push(&[], (order - TARGET_ORDER).abs());
}

fn riemann_like_residual(p: &DenseTensor) -> f64 {
    let n = p.dim();
    let scale = p.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = p.symmetry_residual() * scale;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = p.at4(i, j, k, l);
                    worst = worst.max((v - p.at4(k, l, i, j)).abs());
                    worst = worst.max((v + p.at4(i, k, l, j) + p.at4(i, l, j, k)).abs());
                }
            }
        }
    }
    worst / scale
}

fn riemann_scale(cp: &CurvaturePoint, q: usize) -> f64 {
    cp.riemann_mixed.max_abs().powi(q as i32)
}

/// Intrinsic checks for a metric (or the induced metric of an immersion).
pub fn metric_suite(model: &dyn MetricModel, points: &[Vec<f64>], cfg: &SuiteConfig) -> Vec<IdentityReport> {
    let n = model.dim();
    let name = model.name();
    let sign = cfg.sign;
    let mut out = Vec::new();

    let mut bianchi = IdentityReport::new("first-bianchi", &name, None, BIANCHI_TOL);
    pointwise(&mut bianchi, points, |x| {
        let cp = curvature_at_with(model, x, 1, sign)?;
        let r = &cp.riemann_low;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        worst = worst.max((r.at4(i, j, k, l) + r.at4(i, k, l, j) + r.at4(i, l, j, k)).abs());
                    }
                }
            }
        }
        Ok(rel(worst, r.max_abs()))
    });
    out.push(bianchi);

    let mut einstein = IdentityReport::new("einstein-is-lovelock-1", &name, Some(1), EINSTEIN_TOL);
    pointwise(&mut einstein, points, |x| {
        let cp = curvature_at_with(model, x, 1, sign)?;
        let scale = cp.einstein.max_abs().max(cp.lovelock.max_abs()).max(riemann_scale(&cp, 1));
        let d = cp.einstein.relative_distance(&cp.lovelock) * cp.einstein.max_abs().max(cp.lovelock.max_abs());
        Ok(rel(d, scale))
    });
    out.push(einstein);

    for q in orders_for(n, cfg) {
        let mut trace = IdentityReport::new("lovelock-trace", &name, Some(q), TRACE_TOL);
        pointwise(&mut trace, points, |x| {
            let cp = curvature_at_with(model, x, q, sign)?;
            let lhs = cp.lovelock.trace_with(&cp.metric_inverse);
            let rhs = -((n - 2 * q) as f64) / 2.0 * cp.gauss_bonnet;
            Ok(rel((lhs - rhs).abs(), lhs.abs().max(rhs.abs()).max(riemann_scale(&cp, q))))
        });
        out.push(trace);

        let mut sym = IdentityReport::new("p-tensor-symmetries", &name, Some(q), P_SYMMETRY_TOL);
        pointwise(&mut sym, points, |x| {
            let cp = curvature_at_with(model, x, q, sign)?;
            let p = p_tensor(&cp.riemann_mixed, &cp.metric_inverse, q)?;
            Ok(riemann_like_residual(&p))
        });
        out.push(sym);

        if cfg.convergence {
            let pts = &points[..cfg.convergence_points.min(points.len())];
            let mut div = IdentityReport::new("lovelock-divergence-order", &name, Some(q), ORDER_BAND);
            convergence_order(&mut div, pts, &cfg.steps, |x, h| lovelock_divergence_residual(model, x, q, h));
            out.push(div);
        }
    }

    if cfg.convergence {
        let pts = &points[..cfg.convergence_points.min(points.len())];
        let mut ps = IdentityReport::new("pohozaev-schoen-order", &name, None, ORDER_BAND);
        let (k, v) = test_fields(n, cfg.seed);
        convergence_order(&mut ps, pts, &cfg.steps, |x, h| pohozaev_schoen_residual(&k, &v, model, x, h));
        out.push(ps);
    }
    out
}

/// Smooth bounded fields `K_ij = δ_ij + c_ij sin(a_ij·x)` and `V^i = x^i + d_i cos(b_i·x)`.
#[allow(clippy::type_complexity)]
pub fn test_fields(n: usize, seed: u64) -> (impl Fn(&[f64]) -> Vec<f64> + Sync, impl Fn(&[f64]) -> Vec<f64> + Sync) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut draw = |len: usize, s: f64| -> Vec<f64> { (0..len).map(|_| rng.gen_range(-s..s)).collect() };
    let kc = draw(n * n, 0.3);
    let ka = draw(n * n * n, 0.5);
    let vd = draw(n, 0.5);
    let vb = draw(n * n, 0.5);
    let k = move |x: &[f64]| {
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let (a, b) = (i.min(j), i.max(j));
                let phase: f64 = (0..n).map(|m| ka[(a * n + b) * n + m] * x[m]).sum();
                let v = if i == j { 1.0 } else { 0.0 } + kc[a * n + b] * phase.sin();
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        out
    };
    let v = move |x: &[f64]| {
        (0..n)
            .map(|i| {
                let phase: f64 = (0..n).map(|m| vb[i * n + m] * x[m]).sum();
                x[i] + vd[i] * phase.cos()
            })
            .collect::<Vec<f64>>()
    };
    (k, v)
}

fn b_scale(ep: &ExtrinsicPoint) -> f64 {
    let b = ep.second_ff.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    b * ep.metric_inverse.max_abs()
}

fn newton_trace_residual(ep: &ExtrinsicPoint, p: usize) -> f64 {
    let (n, d) = (ep.dim, ep.ambient);
    let scale0 = b_scale(ep).powi(p as i32);
    if p % 2 == 0 {
        let lhs = ep.t_even(p).trace_with(&ep.metric_inverse);
        let rhs = (n - p) as f64 * ep.s_even(p);
        rel((lhs - rhs).abs(), lhs.abs().max(rhs.abs()).max(scale0))
    } else {
        let t = ep.t_odd(p);
        let s = ep.s_odd(p);
        let mut worst = 0.0f64;
        let mut scale = scale0;
        for a in 0..d {
            let mut tr = 0.0;
            for i in 0..n {
                for j in 0..n {
                    tr += ep.metric_inverse.at2(i, j) * t[(i * n + j) * d + a];
                }
            }
            let rhs = (n - p) as f64 * s[a];
            worst = worst.max((tr - rhs).abs());
            scale = scale.max(tr.abs()).max(rhs.abs());
        }
        rel(worst, scale)
    }
}

fn newton_b_residual(ep: &ExtrinsicPoint, p: usize) -> f64 {
    let (n, d) = (ep.dim, ep.ambient);
    let t = ep.t_even(p);
    let braised = ep.second_ff_raised();
    let s = ep.s_odd(p + 1);
    let mut worst = 0.0f64;
    let mut scale = b_scale(ep).powi(p as i32 + 1);
    for a in 0..d {
        let mut lhs = 0.0;
        for i in 0..n {
            for j in 0..n {
                lhs += t.at2(i, j) * braised[(i * n + j) * d + a];
            }
        }
        let rhs = (p + 1) as f64 * s[a];
        worst = worst.max((lhs - rhs).abs());
        scale = scale.max(lhs.abs()).max(rhs.abs());
    }
    rel(worst, scale)
}

/// Extrinsic checks of an immersion.
pub fn immersion_suite(model: &dyn ImmersionModel, points: &[Vec<f64>], cfg: &SuiteConfig) -> Vec<IdentityReport> {
    let n = model.dim();
    let name = model.name();
    let mut out = Vec::new();

    let mut orth = IdentityReport::new("b-normality", &name, None, ORTHOGONALITY_TOL);
    pointwise(&mut orth, points, |x| {
        let ep = extrinsic_at(model, x)?;
        let scale = ep.second_ff.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        Ok(ep.tangential_leak() / scale)
    });
    out.push(orth);

    let mut trace = IdentityReport::new("newton-trace", &name, None, NEWTON_TOL);
    pointwise(&mut trace, points, |x| {
        let ep = extrinsic_at(model, x)?;
        Ok((0..=n).map(|p| newton_trace_residual(&ep, p)).fold(0.0, f64::max))
    });
    out.push(trace);

    let mut tb = IdentityReport::new("newton-contraction", &name, None, NEWTON_TOL);
    pointwise(&mut tb, points, |x| {
        let ep = extrinsic_at(model, x)?;
        Ok((0..n).step_by(2).map(|p| newton_b_residual(&ep, p)).fold(0.0, f64::max))
    });
    out.push(tb);

    for q in orders_for(n, cfg) {
        let mut gauss = IdentityReport::new("gauss-relation", &name, Some(q), GAUSS_TOL);
        pointwise(&mut gauss, points, |x| gauss_relation_residual_with(model, x, q, cfg.sign));
        if cfg.sign == RiemannSign::Flipped {
            gauss.note("Riemann sign deliberately flipped (negative control)");
        }
        out.push(gauss);

        if cfg.convergence {
            let pts = &points[..cfg.convergence_points.min(points.len())];
            let mut div = IdentityReport::new("divergence-identity-order", &name, Some(q), ORDER_BAND);
            convergence_order(&mut div, pts, &cfg.steps, |x, h| divergence_identity_residual(model, x, q, h));
            out.push(div);
        }
    }
    out
}

/// The full suite for one model: intrinsic checks on its metric plus, for
/// immersions, the extrinsic ones.
pub fn run_suite(spec: &ModelSpec, cfg: &SuiteConfig) -> Result<Vec<IdentityReport>> {
    let model = make_model(spec)?;
    Ok(run_suite_on(&model, spec.sample_shell(), cfg))
}

pub fn run_suite_on(model: &Model, shell: (f64, f64), cfg: &SuiteConfig) -> Vec<IdentityReport> {
    let points = sample_points(model.dim(), shell, cfg.points, cfg.seed);
    let mut out = metric_suite(model.metric().as_ref(), &points, cfg);
    if let Some(imm) = model.immersion() {
        out.extend(immersion_suite(imm, &points, cfg));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_lie_in_the_shell() {
        let pts = sample_points(4, (2.0, 3.0), 40, 1);
        assert!(pts.iter().all(|p| {
            let r = crate::linalg::norm(p);
            (2.0 - 1e-12..=3.0 + 1e-12).contains(&r)
        }));
        assert_eq!(pts, sample_points(4, (2.0, 3.0), 40, 1));
    }

    #[test]
    fn flat_suite_is_exact() {
        let spec = ModelSpec::Flat { n: 5, tau: 1.0 };
        let cfg = SuiteConfig {
            points: 5,
            convergence: false,
            ..Default::default()
        };
        for r in run_suite(&spec, &cfg).unwrap() {
            assert!(r.pass, "{}", r.identity);
            assert_eq!(r.max_residual, 0.0, "{}", r.identity);
        }
    }
}
