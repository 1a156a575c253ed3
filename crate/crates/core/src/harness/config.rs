use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HsError, Result};
use crate::euler_data::{appendix_a_datum, cosine_datum, cusp_datum, make_multipeakon, InitialDatum};
use crate::projection::SignRule;
use crate::reference::{IntegralMode, ReferenceSolution, DEFAULT_INV_TOL, DEFAULT_QUAD_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Example {
    AppendixA,
    Cosine,
    Cusp { a: f64, b: f64 },
    Multipeakon { points: Vec<(f64, f64)> },
}

impl Example {
    pub fn id(&self) -> String {
        match self {
            Example::AppendixA => "appendixA".into(),
            Example::Cosine => "cosine".into(),
            Example::Cusp { a, b } => format!("cusp({a},{b})"),
            Example::Multipeakon { points } => format!("multipeakon({})", points.len()),
        }
    }

    pub fn datum(&self) -> Result<InitialDatum> {
        match self {
            Example::AppendixA => Ok(appendix_a_datum()),
            Example::Cosine => Ok(cosine_datum()),
            Example::Cusp { a, b } => cusp_datum(*a, *b),
            Example::Multipeakon { points } => make_multipeakon(points),
        }
    }

    pub fn reference(&self, alpha: f64, tol: &Tolerances) -> Result<ReferenceSolution> {
        let r = match self {
            Example::AppendixA => ReferenceSolution::appendix_a(alpha),
            Example::Cosine => ReferenceSolution::cosine(alpha),
            Example::Cusp { a, b } => ReferenceSolution::cusp(alpha, *a, *b)?,
            Example::Multipeakon { points } => ReferenceSolution::from_datum(make_multipeakon(points)?, alpha)?,
        };
        Ok(r.with_tolerances(tol.quad_tol, tol.inv_tol).with_mode(tol.integrals))
    }

    /// Parses the CLI spelling: `appendixA`, `cosine`, `cusp` or `multipeakon`.
    pub fn from_cli(name: &str, cusp: (f64, f64), points: Option<Vec<(f64, f64)>>) -> Result<Self> {
        match name {
            "appendixA" | "appendix-a" => Ok(Example::AppendixA),
            "cosine" => Ok(Example::Cosine),
            "cusp" => Ok(Example::Cusp { a: cusp.0, b: cusp.1 }),
            "multipeakon" => match points {
                Some(points) => Ok(Example::Multipeakon { points }),
                None => Err(HsError::Config("multipeakon example needs --points".into())),
            },
            other => Err(HsError::Config(format!("unknown example '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    LinfU,
    L2Ux,
    W1,
    Dbl,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub quad_tol: f64,
    pub inv_tol: f64,
    /// Breaking-set integrals of the reference solution.
    pub integrals: IntegralMode,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quad_tol: DEFAULT_QUAD_TOL,
            inv_tol: DEFAULT_INV_TOL,
            integrals: IntegralMode::Analytic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignRuleConfig {
    MinusFirst,
    PlusFirst,
    #[default]
    MinimizeKink,
}

impl From<SignRuleConfig> for SignRule {
    fn from(s: SignRuleConfig) -> Self {
        match s {
            SignRuleConfig::MinusFirst => SignRule::MinusFirst,
            SignRuleConfig::PlusFirst => SignRule::PlusFirst,
            SignRuleConfig::MinimizeKink => SignRule::MinimizeKink,
        }
    }
}

fn default_time_samples() -> usize {
    64
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::LinfU]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub example: Example,
    pub alpha: f64,
    /// Inclusive `[k_min, k_max]`; `dx_k = 2^{-2k}`.
    pub k_range: (u32, u32),
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(default = "default_time_samples")]
    pub time_samples: usize,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub probe_times: Vec<f64>,
    #[serde(default)]
    pub sign_rule: SignRuleConfig,
}

impl ExperimentConfig {
    pub fn new(example: Example, alpha: f64, k_range: (u32, u32), t_end: f64) -> Self {
        Self {
            example,
            alpha,
            k_range,
            t_end,
            time_samples: default_time_samples(),
            outputs: Outputs::default(),
            metrics: default_metrics(),
            tolerances: Tolerances::default(),
            probe_times: Vec::new(),
            sign_rule: SignRuleConfig::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HsError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HsError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(HsError::Config(format!("alpha must lie in [0, 1] (got {})", self.alpha)));
        }
        if self.k_range.0 > self.k_range.1 {
            return Err(HsError::Config(format!("empty k range {:?}", self.k_range)));
        }
        if self.k_range.1 > 15 {
            return Err(HsError::Config(format!("k = {} is beyond the supported ladder", self.k_range.1)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(HsError::Config(format!("T must be positive (got {})", self.t_end)));
        }
        if self.time_samples < 2 {
            return Err(HsError::Config("time_samples must be at least 2".into()));
        }
        if !(self.tolerances.quad_tol > 0.0 && self.tolerances.inv_tol > 0.0) {
            return Err(HsError::Config("tolerances must be positive".into()));
        }
        if let Some(t) = self.probe_times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(HsError::Config(format!("probe times must be finite and nonnegative (got {t})")));
        }
        if let Example::Cusp { a, b } = self.example {
            if !(a <= b) {
                return Err(HsError::Config(format!("cusp needs a <= b (got {a}, {b})")));
            }
        }
        Ok(())
    }

    pub fn ks(&self) -> impl Iterator<Item = u32> {
        self.k_range.0..=self.k_range.1
    }
}

/// `dx_k = 2^{-2k}`.
pub fn dx_for_k(k: u32) -> f64 {
    2f64.powi(-2 * k as i32)
}
