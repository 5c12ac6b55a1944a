//! The model zoo: analytic metrics and immersions with known or
//! cross-checkable behaviour, declarative specs, and the AE immersion checker.

mod immersions;
mod metrics;

pub use immersions::{
    BumpGraph, Codim2Graph, ConeGraph, FlatInclusion, RandomPolyGraph, SchwarzschildGraph, StereographicSphere,
};
pub use metrics::{ConformallyFlat, Flat, PolynomialPerturbation, Recharted, Schwarzschild, SlowDecay, SpherePatch};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extrinsic::{ImmersionModel, InducedMetric};
use crate::intrinsic::{ae_decay_check_with_order, bounded_trend, probe_directions, MetricModel};
use crate::linalg;
use crate::report::{IdentityReport, SampleResidual};

fn one() -> f64 {
    1.0
}
fn default_p() -> f64 {
    2.0
}
fn default_eps() -> f64 {
    0.05
}
fn default_slow() -> f64 {
    0.3
}
fn default_slope() -> f64 {
    0.1
}
fn default_graph_scale() -> f64 {
    0.3
}
fn default_seed() -> u64 {
    7
}

/// Declarative model description, as read from run configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Flat {
        n: usize,
        #[serde(default = "one")]
        tau: f64,
    },
    Schwarzschild {
        n: usize,
        m: f64,
        #[serde(default)]
        rho_min: Option<f64>,
        /// Rotation angle of the alternative chart (radians).
        #[serde(default)]
        rotation: f64,
        #[serde(default)]
        shift: Vec<f64>,
    },
    ConformallyFlat {
        n: usize,
        m: f64,
        #[serde(default)]
        dipole: Vec<f64>,
        #[serde(default)]
        c: f64,
        #[serde(default = "default_p")]
        p: f64,
        #[serde(default = "one")]
        rho_min: f64,
    },
    SpherePatch {
        n: usize,
        r: f64,
    },
    PolyPerturbation {
        n: usize,
        #[serde(default = "default_eps")]
        eps: f64,
        #[serde(default = "default_seed")]
        seed: u64,
    },
    SlowDecay {
        n: usize,
        #[serde(default = "default_slow")]
        s: f64,
        #[serde(default = "one")]
        tau: f64,
    },
    FlatInclusion {
        n: usize,
        d: usize,
    },
    SchwarzschildGraph {
        n: usize,
        m: f64,
    },
    BumpGraph {
        n: usize,
        amplitude: f64,
        support: f64,
    },
    Codim2Graph {
        n: usize,
        c1: f64,
        sigma1: f64,
        c2: f64,
        sigma2: f64,
    },
    SphereImmersion {
        n: usize,
        r: f64,
    },
    ConeGraph {
        n: usize,
        #[serde(default = "default_slope")]
        slope: f64,
        #[serde(default = "one")]
        tau: f64,
    },
    RandomGraph {
        n: usize,
        codim: usize,
        #[serde(default = "default_graph_scale")]
        scale: f64,
        #[serde(default = "default_seed")]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Metric,
    Immersion,
}

pub enum Model {
    Metric(Box<dyn MetricModel>),
    Immersion(Box<dyn ImmersionModel>),
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Model({})", self.name())
    }
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Metric(_) => ModelKind::Metric,
            Model::Immersion(_) => ModelKind::Immersion,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Model::Metric(m) => m.name(),
            Model::Immersion(m) => m.name(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Metric(m) => m.dim(),
            Model::Immersion(m) => m.dim(),
        }
    }

    pub fn rho_min(&self) -> f64 {
        match self {
            Model::Metric(m) => m.rho_min(),
            Model::Immersion(m) => m.rho_min(),
        }
    }

    pub fn decay_order(&self) -> f64 {
        match self {
            Model::Metric(m) => m.decay_order(),
            Model::Immersion(m) => m.decay_order(),
        }
    }

    /// The metric itself, or the induced metric of an immersion.
    pub fn metric(&self) -> Box<dyn MetricModel + '_> {
        match self {
            Model::Metric(m) => Box::new(Borrowed(m.as_ref())),
            Model::Immersion(m) => Box::new(InducedMetric(m.as_ref())),
        }
    }

    pub fn immersion(&self) -> Option<&dyn ImmersionModel> {
        match self {
            Model::Metric(_) => None,
            Model::Immersion(m) => Some(m.as_ref()),
        }
    }
}

struct Borrowed<'a>(&'a dyn MetricModel);

impl MetricModel for Borrowed<'_> {
    fn name(&self) -> String {
        self.0.name()
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
        self.0.metric(x)
    }
    fn sample(&self, x: &[f64]) -> crate::intrinsic::MetricSample {
        self.0.sample(x)
    }
    fn analytic_sample(&self, x: &[f64]) -> Option<crate::intrinsic::MetricSample> {
        self.0.analytic_sample(x)
    }
}

fn spec_err(msg: impl Into<String>) -> Error {
    Error::Spec(msg.into())
}

fn check_dim(n: usize) -> Result<()> {
    if !(3..=crate::jet::MAX_VARS).contains(&n) {
        return Err(spec_err(format!("dimension n = {n} must lie in 3..={}", crate::jet::MAX_VARS)));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(spec_err(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

impl ModelSpec {
    pub fn dim(&self) -> usize {
        match *self {
            ModelSpec::Flat { n, .. }
            | ModelSpec::Schwarzschild { n, .. }
            | ModelSpec::ConformallyFlat { n, .. }
            | ModelSpec::SpherePatch { n, .. }
            | ModelSpec::PolyPerturbation { n, .. }
            | ModelSpec::SlowDecay { n, .. }
            | ModelSpec::FlatInclusion { n, .. }
            | ModelSpec::SchwarzschildGraph { n, .. }
            | ModelSpec::BumpGraph { n, .. }
            | ModelSpec::Codim2Graph { n, .. }
            | ModelSpec::SphereImmersion { n, .. }
            | ModelSpec::ConeGraph { n, .. }
            | ModelSpec::RandomGraph { n, .. } => n,
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Flat { .. }
            | ModelSpec::Schwarzschild { .. }
            | ModelSpec::ConformallyFlat { .. }
            | ModelSpec::SpherePatch { .. }
            | ModelSpec::PolyPerturbation { .. }
            | ModelSpec::SlowDecay { .. } => ModelKind::Metric,
            _ => ModelKind::Immersion,
        }
    }

    /// Radial shell `(ρ_lo, ρ_hi)` where randomized pointwise checks sample the model.
    pub fn sample_shell(&self) -> (f64, f64) {
        match self {
            ModelSpec::SpherePatch { r, .. } | ModelSpec::SphereImmersion { r, .. } => (0.1 * r, 0.8 * r),
            ModelSpec::PolyPerturbation { .. } => (0.1, 1.0),
            ModelSpec::RandomGraph { .. } => (0.1, 0.8),
            ModelSpec::BumpGraph { support, .. } => (0.1 * support, 0.95 * support),
            ModelSpec::Schwarzschild { .. } | ModelSpec::ConformallyFlat { .. } | ModelSpec::SlowDecay { .. } => {
                let lo = make_model(self).map(|m| m.rho_min()).unwrap_or(1.0);
                (1.5 * lo + 0.5, 1.5 * lo + 8.0)
            }
            ModelSpec::SchwarzschildGraph { .. } => {
                let lo = make_model(self).map(|m| m.rho_min()).unwrap_or(1.0);
                (1.5 * lo + 0.5, 1.5 * lo + 6.0)
            }
            _ => (0.5, 5.0),
        }
    }
}

/// Builds the model described by `spec`, validating its parameters.
pub fn make_model(spec: &ModelSpec) -> Result<Model> {
    check_dim(spec.dim())?;
    Ok(match spec.clone() {
        ModelSpec::Flat { n, tau } => {
            positive("tau", tau)?;
            Model::Metric(Box::new(Flat { n, tau }))
        }
        ModelSpec::Schwarzschild {
            n,
            m,
            rho_min,
            rotation,
            shift,
        } => {
            let horizon = (m.abs() / 2.0).powf(1.0 / (n - 2) as f64);
            let rho_min = rho_min.unwrap_or((2.0 * horizon).max(1.0));
            if !(rho_min > horizon) {
                return Err(spec_err(format!(
                    "isotropic Schwarzschild needs rho_min > (|m|/2)^(1/(n-2)) = {horizon}, got {rho_min}"
                )));
            }
            if shift.len() > n {
                return Err(spec_err("shift has more components than n"));
            }
            let base = Schwarzschild { n, m, rho_min };
            if rotation != 0.0 || shift.iter().any(|s| *s != 0.0) {
                Model::Metric(Box::new(Recharted::new(base, rotation, shift)))
            } else {
                Model::Metric(Box::new(base))
            }
        }
        ModelSpec::ConformallyFlat {
            n,
            m,
            dipole,
            c,
            p,
            rho_min,
        } => {
            positive("p", p)?;
            positive("rho_min", rho_min)?;
            if dipole.len() > n {
                return Err(spec_err("dipole has more components than n"));
            }
            // Crude lower bound on u over ρ ≥ ρ_min.
            let k = (n - 2) as f64;
            let lower = 1.0 - m.abs() / (2.0 * rho_min.powf(k)) - linalg::norm(&dipole) / rho_min.powf(k + 1.0) - c.abs();
            if !(lower > 0.0) {
                return Err(spec_err("conformal factor may vanish on the chart domain; increase rho_min"));
            }
            let mut dipole = dipole;
            dipole.resize(n, 0.0);
            Model::Metric(Box::new(ConformallyFlat {
                n,
                m,
                dipole,
                c,
                p,
                rho_min,
            }))
        }
        ModelSpec::SpherePatch { n, r } => {
            positive("r", r)?;
            Model::Metric(Box::new(SpherePatch { n, r }))
        }
        ModelSpec::PolyPerturbation { n, eps, seed } => {
            if !(eps.abs() < 0.1) {
                return Err(spec_err("eps must satisfy |eps| < 0.1 to keep the metric positive definite"));
            }
            Model::Metric(Box::new(PolynomialPerturbation::new(n, eps, seed)))
        }
        ModelSpec::SlowDecay { n, s, tau } => {
            positive("s", s)?;
            positive("tau", tau)?;
            Model::Metric(Box::new(SlowDecay { n, s, tau }))
        }
        ModelSpec::FlatInclusion { n, d } => {
            if d <= n {
                return Err(spec_err(format!("ambient dimension d = {d} must exceed n = {n}")));
            }
            Model::Immersion(Box::new(FlatInclusion { n, d }))
        }
        ModelSpec::SchwarzschildGraph { n, m } => {
            if !(n == 3 || n == 4) {
                return Err(spec_err("the Schwarzschild graph is available for n = 3 and n = 4"));
            }
            if m < 0.0 {
                return Err(spec_err(
                    "no rotational graph realizes Schwarzschild with m < 0: the height profile would need u'^2 < 0",
                ));
            }
            positive("m", m)?;
            Model::Immersion(Box::new(SchwarzschildGraph { n, m }))
        }
        ModelSpec::BumpGraph { n, amplitude, support } => {
            positive("support", support)?;
            Model::Immersion(Box::new(BumpGraph { n, amplitude, support }))
        }
        ModelSpec::Codim2Graph {
            n,
            c1,
            sigma1,
            c2,
            sigma2,
        } => {
            positive("sigma1", sigma1)?;
            positive("sigma2", sigma2)?;
            Model::Immersion(Box::new(Codim2Graph {
                n,
                c1,
                sigma1,
                c2,
                sigma2,
            }))
        }
        ModelSpec::SphereImmersion { n, r } => {
            positive("r", r)?;
            Model::Immersion(Box::new(StereographicSphere { n, r }))
        }
        ModelSpec::ConeGraph { n, slope, tau } => {
            positive("tau", tau)?;
            Model::Immersion(Box::new(ConeGraph { n, slope, tau }))
        }
        ModelSpec::RandomGraph { n, codim, scale, seed } => {
            if codim == 0 || n + codim > 12 {
                return Err(spec_err("codim must be positive and n + codim ≤ 12"));
            }
            Model::Immersion(Box::new(RandomPolyGraph::new(n, codim, scale, seed)))
        }
    })
}

/// One named entry of the zoo.
#[derive(Debug, Clone, Serialize)]
pub struct ZooEntry {
    pub key: &'static str,
    pub spec: ModelSpec,
    pub description: &'static str,
    /// Satisfies the hypotheses of the bulk/flux identity for the listed orders.
    pub theorem_orders: Vec<usize>,
    pub negative_control: bool,
}

pub fn zoo() -> Vec<ZooEntry> {
    let e = |key, spec, description, theorem_orders: &[usize], negative_control| ZooEntry {
        key,
        spec,
        description,
        theorem_orders: theorem_orders.to_vec(),
        negative_control,
    };
    vec![
        e("flat3", ModelSpec::Flat { n: 3, tau: 1.0 }, "Euclidean R^3; every mass vanishes", &[], false),
        e("flat5", ModelSpec::Flat { n: 5, tau: 1.0 }, "Euclidean R^5", &[], false),
        e(
            "schwarzschild3",
            ModelSpec::Schwarzschild { n: 3, m: 1.0, rho_min: None, rotation: 0.0, shift: vec![] },
            "isotropic Schwarzschild, n=3, m=1; ADM mass 1",
            &[],
            false,
        ),
        e(
            "schwarzschild4",
            ModelSpec::Schwarzschild { n: 4, m: 1.0, rho_min: None, rotation: 0.0, shift: vec![] },
            "isotropic Schwarzschild, n=4, m=1",
            &[],
            false,
        ),
        e(
            "schwarzschild5",
            ModelSpec::Schwarzschild { n: 5, m: 2.0, rho_min: None, rotation: 0.0, shift: vec![] },
            "isotropic Schwarzschild, n=5, m=2; ADM mass 2",
            &[],
            false,
        ),
        e(
            "schwarzschild3-rechart",
            ModelSpec::Schwarzschild { n: 3, m: 1.0, rho_min: None, rotation: 0.7, shift: vec![0.4, -0.3, 0.2] },
            "schwarzschild3 in a rotated and translated chart",
            &[],
            false,
        ),
        e(
            "conformal5",
            ModelSpec::ConformallyFlat { n: 5, m: 1.0, dipole: vec![0.3, -0.2], c: 0.2, p: 1.0, rho_min: 1.5 },
            "conformally flat n=5 with monopole, dipole and a slowly decaying term",
            &[],
            false,
        ),
        e("sphere-patch4", ModelSpec::SpherePatch { n: 4, r: 1.5 }, "stereographic round 4-sphere (not AE)", &[], false),
        e(
            "poly-metric5",
            ModelSpec::PolyPerturbation { n: 5, eps: 0.05, seed: 7 },
            "delta plus a random quadratic perturbation (pointwise tests only)",
            &[],
            false,
        ),
        e(
            "slow-decay3",
            ModelSpec::SlowDecay { n: 3, s: 0.3, tau: 1.0 },
            "(1 + rho^-0.3) delta claiming tau = 1 (negative control)",
            &[],
            true,
        ),
        e(
            "flat-inclusion5",
            ModelSpec::FlatInclusion { n: 5, d: 7 },
            "affine 5-plane in R^7",
            &[1, 2],
            false,
        ),
        e(
            "schwarzschild-graph3",
            ModelSpec::SchwarzschildGraph { n: 3, m: 1.0 },
            "rotational graph in R^4 inducing Schwarzschild n=3, m=1",
            &[1],
            false,
        ),
        e(
            "schwarzschild-graph4",
            ModelSpec::SchwarzschildGraph { n: 4, m: 1.0 },
            "rotational graph in R^5 inducing Schwarzschild n=4, m=1",
            &[1],
            false,
        ),
        e(
            "bump-graph3",
            ModelSpec::BumpGraph { n: 3, amplitude: 0.8, support: 3.0 },
            "compactly supported bump graph; every mass vanishes",
            &[1],
            false,
        ),
        e(
            "codim2-q1",
            ModelSpec::Codim2Graph { n: 5, c1: 1.0, sigma1: 1.5, c2: 0.5, sigma2: 2.0 },
            "codimension-2 decaying graph tuned for a finite q=1 mass (tau = 3)",
            &[1],
            false,
        ),
        e(
            "codim2-q2",
            ModelSpec::Codim2Graph { n: 5, c1: 1.0, sigma1: 0.25, c2: 0.5, sigma2: 1.0 },
            "codimension-2 decaying graph tuned for a finite q=2 mass (tau = 1/2)",
            &[2],
            false,
        ),
        e("sphere-immersion4", ModelSpec::SphereImmersion { n: 4, r: 1.5 }, "round 4-sphere of radius 1.5 in R^5 (not AE)", &[], false),
        e(
            "cone3",
            ModelSpec::ConeGraph { n: 3, slope: 0.1, tau: 1.0 },
            "asymptotically conical graph claiming tau = 1 (negative control)",
            &[],
            true,
        ),
        e(
            "random-graph5",
            ModelSpec::RandomGraph { n: 5, codim: 1, scale: 0.3, seed: 11 },
            "random cubic codimension-1 graph (pointwise tests only)",
            &[],
            false,
        ),
        e(
            "random-graph5-codim2",
            ModelSpec::RandomGraph { n: 5, codim: 2, scale: 0.3, seed: 12 },
            "random cubic codimension-2 graph (pointwise tests only)",
            &[],
            false,
        ),
    ]
}

pub fn zoo_entry(key: &str) -> Result<ZooEntry> {
    zoo()
        .into_iter()
        .find(|e| e.key == key)
        .ok_or_else(|| spec_err(format!("unknown zoo model '{key}'")))
}

/// Checks both conditions of an AE immersion of order `tau` along `radii`:
/// (i) decay of the induced metric and (ii) `ρ^{τ−1}|∂(|ψ|² − ρ²)|` bounded.
pub fn ae_immersion_check(model: &dyn ImmersionModel, tau: f64, radii: &[f64]) -> IdentityReport {
    let induced = InducedMetric(model);
    let first = ae_decay_check_with_order(&induced, tau, radii);
    let mut report = IdentityReport::new("ae-immersion", model.name(), None, first.tolerance);
    report.notes = first.notes.clone();
    for (k, v) in &first.values {
        report.value(format!("(i) {k}"), *v);
    }
    report.samples = first.samples.clone();
    report.max_residual = first.max_residual;
    if !first.pass {
        report.fail("condition (i): induced metric does not decay at the claimed order");
    }
    if radii.len() < 2 || radii.iter().any(|r| *r < model.rho_min()) {
        report.fail("radii must be a ladder inside the chart domain");
        return report;
    }
    let n = model.dim();
    let dirs = probe_directions(n, 6, 0x1e55);
    let mut series = Vec::with_capacity(radii.len());
    for &rho in radii {
        let mut worst = 0.0f64;
        for d in &dirs {
            let x: Vec<f64> = d.iter().map(|c| c * rho).collect();
            let s = model.sample(&x);
            for i in 0..n {
                let v = 2.0 * linalg::dot(&s.psi, s.tangent(i)) - 2.0 * x[i];
                worst = worst.max(v.abs());
            }
        }
        series.push(rho.powf(tau - 1.0) * worst);
    }
    let (ok, slope) = bounded_trend(radii, &series);
    for (r, v) in radii.iter().zip(&series) {
        report.value(format!("(ii) position@{r}"), *v);
    }
    report.value("(ii) slope", slope);
    report.samples.push(SampleResidual {
        point: vec![],
        residual: slope.max(0.0),
    });
    report.max_residual = report.max_residual.max(slope);
    if !ok {
        report.fail(format!("condition (ii): rho^(tau-1)|d(|psi|^2 - rho^2)| grows (log-log slope {slope:.3})"));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_zoo_entry_builds() {
        for e in zoo() {
            let m = make_model(&e.spec).unwrap_or_else(|err| panic!("{}: {err}", e.key));
            assert_eq!(m.kind(), e.spec.kind());
            assert_eq!(m.dim(), e.spec.dim());
        }
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let bad = [
            ModelSpec::Schwarzschild { n: 3, m: 1.0, rho_min: Some(0.4), rotation: 0.0, shift: vec![] },
            ModelSpec::SchwarzschildGraph { n: 3, m: -1.0 },
            ModelSpec::SchwarzschildGraph { n: 5, m: 1.0 },
            ModelSpec::Flat { n: 2, tau: 1.0 },
            ModelSpec::FlatInclusion { n: 3, d: 3 },
        ];
        for s in bad {
            assert!(matches!(make_model(&s), Err(Error::Spec(_))), "{s:?}");
        }
    }

    #[test]
    fn spec_round_trips_through_json() {
        let s = ModelSpec::Codim2Graph { n: 5, c1: 1.0, sigma1: 0.25, c2: 0.5, sigma2: 1.0 };
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"model\":\"codim2-graph\""));
        assert_eq!(serde_json::from_str::<ModelSpec>(&j).unwrap(), s);
    }
}
