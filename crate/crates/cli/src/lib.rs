//! Batch front-end for the mass pipelines: declarative run configs, report
//! assembly and file output.

// `!(x > 0.0)` guards are deliberate: they also reject NaN. Index loops mirror tensor notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::manual_is_multiple_of)]

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use exmass_core::identities::{run_suite_on, SuiteConfig};
use exmass_core::mass::{
    mass_estimate, verify_main_identity, BulkConfig, ConstantVariant, ExponentHint, FieldChoice, IdentityConfig,
    MassConfig, MassEstimate, Method,
};
use exmass_core::models::{make_model, zoo, zoo_entry, Model, ModelSpec};
use exmass_core::{Error as CoreError, IdentityReport, RiemannSign};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Numeric(#[from] CoreError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for configuration problems, 3 for numeric/domain failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(CoreError::Spec(_)) => 2,
            CliError::Numeric(_) | CliError::Io { .. } => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSettings {
    pub points: usize,
    pub seed: u64,
    pub steps: Vec<f64>,
    pub main_identity: bool,
}

impl Default for SuiteSettings {
    fn default() -> Self {
        let s = SuiteConfig::default();
        SuiteSettings {
            points: s.points,
            seed: s.seed,
            steps: s.steps,
            main_identity: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub nodes: Vec<usize>,
    /// Number of leading ladder rungs kept in each refinement step (≥ 3).
    pub rungs: Vec<usize>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            nodes: vec![8, 16, 32],
            rungs: vec![3, 4],
        }
    }
}

/// One run, as read from a TOML file and/or assembled from flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Zoo key; ignored when `model` is given.
    pub zoo: Option<String>,
    pub model: Option<ModelSpec>,
    pub q: usize,
    pub methods: Vec<Method>,
    pub nodes: usize,
    pub ladder: Vec<f64>,
    /// Relative agreement required between methods and between the two sides of the identity.
    pub tolerance: f64,
    pub constant: ConstantVariant,
    pub field: FieldChoice,
    pub hint: ExponentHint,
    pub out: Option<PathBuf>,
    pub flip_sign: bool,
    pub bulk: BulkConfig,
    pub suite: SuiteSettings,
    pub sweep: SweepSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            zoo: None,
            model: None,
            q: 1,
            methods: vec![Method::CoordinateAdm],
            nodes: 16,
            ladder: vec![25.0, 50.0, 100.0, 200.0],
            tolerance: 0.02,
            constant: ConstantVariant::Proof,
            field: FieldChoice::Position,
            hint: ExponentHint::DecayOrder,
            out: None,
            flip_sign: false,
            bulk: BulkConfig::default(),
            suite: SuiteSettings::default(),
            sweep: SweepSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => config_err(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn model_spec(&self) -> CliResult<ModelSpec> {
        match (&self.model, &self.zoo) {
            (Some(spec), _) => Ok(spec.clone()),
            (None, Some(key)) => Ok(zoo_entry(key).map_err(|e| config_err(e.to_string()))?.spec),
            (None, None) => Err(config_err("no model given: set `zoo = \"…\"`, a [model] table or --model")),
        }
    }

    /// Field-level checks that serde cannot express.
    pub fn validate(&self) -> CliResult<ModelSpec> {
        let spec = self.model_spec()?;
        let n = spec.dim();
        if self.q == 0 || 2 * self.q >= n {
            return Err(config_err(format!("q: need 1 ≤ q and 2q < n = {n}, got q = {}", self.q)));
        }
        if !(self.tolerance > 0.0) {
            return Err(config_err(format!("tolerance: must be positive, got {}", self.tolerance)));
        }
        if self.nodes == 0 {
            return Err(config_err("nodes: must be positive"));
        }
        if self.ladder.len() < 3 {
            return Err(config_err("ladder: at least three radii are required"));
        }
        if self.ladder.windows(2).any(|w| !(w[1] > w[0])) || self.ladder[0] <= 0.0 {
            return Err(config_err("ladder: radii must be positive and strictly increasing"));
        }
        if self.methods.is_empty() {
            return Err(config_err("methods: at least one method is required"));
        }
        if self.suite.points == 0 || self.suite.steps.len() < 2 || self.suite.steps.iter().any(|h| !(*h > 0.0)) {
            return Err(config_err("suite: need points > 0 and at least two positive steps"));
        }
        Ok(spec)
    }

    fn mass_config(&self) -> MassConfig {
        MassConfig {
            radii: self.ladder.clone(),
            nodes_per_angle: self.nodes,
            hint: self.hint,
            field: self.field,
            constant: self.constant,
            bulk: self.bulk.clone(),
        }
    }
}

/// One line of the mass report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassRecord {
    pub model: String,
    pub q: usize,
    pub method: Method,
    pub radii: Vec<f64>,
    pub fluxes: Vec<f64>,
    pub extrapolated: f64,
    pub error: f64,
    pub constant_variant: Option<ConstantVariant>,
    pub pass: bool,
    pub fit_exponent: Option<f64>,
    pub low_confidence: bool,
    pub notes: Vec<String>,
}

impl MassRecord {
    fn from_estimate(e: MassEstimate) -> Self {
        MassRecord {
            model: e.model,
            q: e.q,
            method: e.method,
            radii: e.series.radii,
            fluxes: e.series.values,
            extrapolated: e.value,
            error: e.error_estimate,
            constant_variant: e.constant_variant,
            pass: e.value.is_finite(),
            fit_exponent: e.series.fit_exponent,
            low_confidence: e.series.low_confidence,
            notes: e.notes,
        }
    }
}

/// Runs every configured method; all records fail unless each pair agrees
/// within `tolerance·scale + combined error`.
pub fn run_mass(cfg: &RunConfig) -> CliResult<Vec<MassRecord>> {
    let spec = cfg.validate()?;
    let model = make_model(&spec)?;
    let mc = cfg.mass_config();
    let mut records = Vec::new();
    for &method in &cfg.methods {
        records.push(MassRecord::from_estimate(mass_estimate(&model, method, cfg.q, &mc)?));
    }
    let mut agree = true;
    for (i, a) in records.iter().enumerate() {
        for b in &records[i + 1..] {
            let scale = a.extrapolated.abs().max(b.extrapolated.abs());
            let gap = (a.extrapolated - b.extrapolated).abs();
            if !(gap <= cfg.tolerance * scale + a.error + b.error) {
                agree = false;
            }
        }
    }
    for r in &mut records {
        r.pass &= agree;
        if !agree {
            r.notes.push(format!("methods disagree beyond tolerance {}", cfg.tolerance));
        }
    }
    Ok(records)
}

/// Pointwise identity suite, plus the flux/bulk identity when requested.
pub fn run_verify(cfg: &RunConfig) -> CliResult<Vec<IdentityReport>> {
    let spec = cfg.validate()?;
    let model = make_model(&spec)?;
    let suite = SuiteConfig {
        points: cfg.suite.points,
        seed: cfg.suite.seed,
        steps: cfg.suite.steps.clone(),
        convergence_points: cfg.suite.points,
        sign: if cfg.flip_sign {
            RiemannSign::Flipped
        } else {
            RiemannSign::Standard
        },
        orders: Some(vec![cfg.q]),
        convergence: true,
    };
    let mut reports = run_suite_on(&model, spec.sample_shell(), &suite);
    if cfg.suite.main_identity {
        let imm = model
            .immersion()
            .ok_or_else(|| config_err("suite.main_identity needs an immersion model"))?;
        let ic = IdentityConfig {
            radii: cfg.ladder.clone(),
            nodes_per_angle: cfg.nodes,
            bulk: cfg.bulk.clone(),
            tolerance: cfg.tolerance,
            constant: cfg.constant,
            hint: cfg.hint,
        };
        reports.push(verify_main_identity(imm, cfg.q, &ic)?);
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub method: Method,
    pub nodes: usize,
    pub rungs: usize,
    pub extrapolated: f64,
    pub error: f64,
}

/// Refinement study over quadrature resolution and ladder length.
pub fn run_sweep(cfg: &RunConfig) -> CliResult<Vec<SweepRow>> {
    let spec = cfg.validate()?;
    if cfg.sweep.rungs.iter().any(|r| *r < 3 || *r > cfg.ladder.len()) || cfg.sweep.nodes.contains(&0) {
        return Err(config_err("sweep: rungs must lie in 3..=ladder length and nodes must be positive"));
    }
    let model = make_model(&spec)?;
    let mut rows = Vec::new();
    for &method in &cfg.methods {
        for &nodes in &cfg.sweep.nodes {
            for &rungs in &cfg.sweep.rungs {
                let mut mc = cfg.mass_config();
                mc.nodes_per_angle = nodes;
                mc.radii = cfg.ladder[..rungs].to_vec();
                let e = mass_estimate(&model, method, cfg.q, &mc)?;
                rows.push(SweepRow {
                    method,
                    nodes,
                    rungs,
                    extrapolated: e.value,
                    error: e.error_estimate,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct ZooRow {
    pub key: String,
    pub kind: String,
    pub n: usize,
    pub decay_order: f64,
    pub theorem_orders: Vec<usize>,
    pub negative_control: bool,
    pub description: String,
}

pub fn zoo_rows() -> CliResult<Vec<ZooRow>> {
    zoo()
        .into_iter()
        .map(|e| {
            let m: Model = make_model(&e.spec)?;
            Ok(ZooRow {
                key: e.key.to_string(),
                kind: format!("{:?}", m.kind()).to_lowercase(),
                n: m.dim(),
                decay_order: m.decay_order(),
                theorem_orders: e.theorem_orders,
                negative_control: e.negative_control,
                description: e.description.to_string(),
            })
        })
        .collect()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    fs::write(path, contents).map_err(io_err(path))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// `report.json` plus one `(rho, flux)` CSV per method.
pub fn write_mass_outputs(dir: &Path, records: &[MassRecord]) -> CliResult<()> {
    ensure_dir(dir)?;
    write_file(&dir.join("report.json"), to_json(&records).as_bytes())?;
    for r in records {
        let path = dir.join(format!("{}-q{}.csv", r.method.as_str(), r.q));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["rho", "flux"]).map_err(|e| config_err(e.to_string()))?;
        for (rho, f) in r.radii.iter().zip(&r.fluxes) {
            w.write_record([format!("{rho:e}"), format!("{f:.17e}")])
                .map_err(|e| config_err(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| config_err(e.to_string()))?;
        write_file(&path, &bytes)?;
    }
    Ok(())
}

pub fn write_verify_outputs(dir: &Path, reports: &[IdentityReport]) -> CliResult<()> {
    ensure_dir(dir)?;
    write_file(&dir.join("verify.json"), to_json(&reports).as_bytes())?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["identity", "q", "max_residual", "tolerance", "pass"])
        .map_err(|e| config_err(e.to_string()))?;
    for r in reports {
        w.serialize((&r.identity, r.q, r.max_residual, r.tolerance, r.pass))
            .map_err(|e| config_err(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| config_err(e.to_string()))?;
    write_file(&dir.join("verify.csv"), &bytes)
}

pub fn write_sweep_outputs(dir: &Path, rows: &[SweepRow]) -> CliResult<()> {
    ensure_dir(dir)?;
    write_file(&dir.join("sweep.json"), to_json(&rows).as_bytes())?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| config_err(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| config_err(e.to_string()))?;
    write_file(&dir.join("sweep.csv"), &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_with_inline_model() {
        let cfg = RunConfig::from_toml(
            r#"
            q = 1
            methods = ["coordinate-adm", "coordinate-gbc"]
            nodes = 8
            ladder = [10.0, 20.0, 40.0]
            [model]
            model = "schwarzschild"
            n = 3
            m = 0.5
            "#,
        )
        .unwrap();
        assert_eq!(cfg.methods.len(), 2);
        assert_eq!(cfg.validate().unwrap().dim(), 3);
    }

    #[test]
    fn unknown_field_is_a_config_error() {
        let e = RunConfig::from_toml("nodez = 3").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("nodez"));
    }

    #[test]
    fn invalid_order_and_ladder_are_rejected() {
        let mut cfg = RunConfig {
            zoo: Some("schwarzschild3".into()),
            q: 2,
            ..Default::default()
        };
        assert!(cfg.validate().unwrap_err().to_string().contains("q:"));
        cfg.q = 1;
        cfg.ladder = vec![10.0, 5.0, 20.0];
        assert!(cfg.validate().unwrap_err().to_string().contains("ladder"));
    }
}
