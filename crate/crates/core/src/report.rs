use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SampleResidual {
    pub point: Vec<f64>,
    pub residual: f64,
}

/// Residuals of one named identity over sample points or a region.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct IdentityReport {
    pub identity: String,
    pub model: String,
    pub q: Option<usize>,
    pub tolerance: f64,
    pub max_residual: f64,
    pub pass: bool,
    pub samples: Vec<SampleResidual>,
    pub values: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl IdentityReport {
    pub fn new(identity: impl Into<String>, model: impl Into<String>, q: Option<usize>, tolerance: f64) -> Self {
        IdentityReport {
            identity: identity.into(),
            model: model.into(),
            q,
            tolerance,
            max_residual: 0.0,
            pass: true,
            samples: Vec::new(),
            values: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// Records a residual; the report fails once any residual exceeds the tolerance
    /// (NaN counts as a failure).
    pub fn push(&mut self, point: &[f64], residual: f64) {
        if residual.is_nan() || residual > self.tolerance {
            self.pass = false;
        }
        if residual.is_nan() || residual > self.max_residual {
            self.max_residual = residual;
        }
        self.samples.push(SampleResidual {
            point: point.to_vec(),
            residual,
        });
    }

    pub fn value(&mut self, key: impl Into<String>, v: f64) -> &mut Self {
        self.values.insert(key.into(), v);
        self
    }

    pub fn note(&mut self, s: impl Into<String>) -> &mut Self {
        self.notes.push(s.into());
        self
    }

    pub fn fail(&mut self, why: impl Into<String>) {
        self.pass = false;
        self.notes.push(why.into());
    }
}

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
