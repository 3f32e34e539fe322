//! Experiment configuration: one TOML document, unknown keys rejected.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use hermite_core::chaos::{classify_regime, HurstParams, PowerSeries, SeriesTail};
use hermite_core::functional::{Centering, SimSettings};
use hermite_core::homogenization::{HomogenizationSpec, VectorField};
use hermite_core::process::{HermiteBackend, KernelSpec, KernelVariant};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Invalid configuration or usage; maps to exit status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Decompose,
    Simulate,
    Functional,
    Homogenize,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub h: f64,
    pub m: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub id: String,
    pub coefficients: Vec<f64>,
    /// C in |c_k| ≤ C/k!; the tightest bound is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_rank: Option<u32>,
    #[serde(default)]
    pub tail: SeriesTail,
    #[serde(default)]
    pub centering: Centering,
}

impl SeriesConfig {
    pub fn to_series(&self) -> hermite_core::Result<PowerSeries> {
        match self.growth_bound {
            Some(c) => PowerSeries::with_tail(self.coefficients.clone(), c, self.declared_rank, self.tail),
            None if self.tail == SeriesTail::Bounded => Err(hermite_core::Error::InvalidParameter(
                "a bounded tail needs an explicit growth_bound".into(),
            )),
            None => Ok(PowerSeries::polynomial(self.coefficients.clone())?.with_rank(self.declared_rank)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeConfig {
    pub k: u32,
    pub m: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ceiling: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    Fbm,
    Hermite,
    Volterra,
    Hou,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PathFormat {
    #[default]
    Csv,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub process: ProcessKind,
    pub n_steps: usize,
    #[serde(default)]
    pub format: PathFormat,
    /// Hermite–OU mean reversion and scale.
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "one")]
    pub sigma: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FunctionalConfig {
    /// Estimate Λ for SRD series and κ for LRD series.
    pub limits: bool,
    pub lag_cutoff: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_replicas: Option<usize>,
    pub calibration_samples: usize,
    pub histogram_bins: usize,
}

impl Default for FunctionalConfig {
    fn default() -> Self {
        Self { limits: true, lag_cutoff: 50.0, lambda_replicas: None, calibration_samples: 200_000, histogram_bins: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HomogenizeConfig {
    /// Id of the series driving the equation; the first series when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<String>,
    pub field: VectorField,
    pub x0: f64,
    pub eps: f64,
    pub grid_points: usize,
    pub lambda_cutoff: f64,
    pub lambda_replicas: usize,
    pub kappa_eps: Vec<f64>,
    pub kappa_replicas: usize,
    pub limit_backend: HermiteBackend,
    pub solver_tol: f64,
}

impl Default for HomogenizeConfig {
    fn default() -> Self {
        let d = HomogenizationSpec::default();
        Self {
            series: None,
            field: d.field,
            x0: d.x0,
            eps: d.eps,
            grid_points: d.grid_points,
            lambda_cutoff: d.lambda_cutoff,
            lambda_replicas: d.lambda_replicas,
            kappa_eps: d.kappa_eps,
            kappa_replicas: d.kappa_replicas,
            limit_backend: d.limit_backend,
            solver_tol: d.solver_tol,
        }
    }
}

impl HomogenizeConfig {
    pub fn spec(&self, replicas: usize, seed: u64) -> HomogenizationSpec {
        HomogenizationSpec {
            field: self.field.clone(),
            x0: self.x0,
            eps: self.eps,
            grid_points: self.grid_points,
            replicas,
            seed,
            lambda_cutoff: self.lambda_cutoff,
            lambda_replicas: self.lambda_replicas,
            kappa_eps: self.kappa_eps.clone(),
            kappa_replicas: self.kappa_replicas,
            limit_backend: self.limit_backend,
            solver_tol: self.solver_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub only: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Replica count; each kind has its own default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicas: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub eps: Vec<f64>,
    #[serde(default = "default_t_grid")]
    pub t_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelVariant>,
    #[serde(default)]
    pub sim: SimSettings,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<SeriesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decompose: Option<DecomposeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
    #[serde(default)]
    pub functional: FunctionalConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub homogenize: Option<HomogenizeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
}

fn default_t_grid() -> Vec<f64> {
    vec![0.25, 0.5, 0.75, 1.0]
}

impl ExperimentConfig {
    /// Parses and validates; errors carry the offending line where one can be found.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError(format!("config parse error: {e}")))?;
        cfg.validate().map_err(|e| match e.key.as_deref().and_then(|k| locate(text, k)) {
            Some(line) => ConfigError(format!("config error at line {line}: {}", e.message)),
            None => ConfigError(format!("config error: {}", e.message)),
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn replicas_or(&self, default: usize) -> usize {
        self.replicas.unwrap_or(default)
    }

    pub fn hurst_params(&self) -> Result<HurstParams, ConfigError> {
        let p = self.params.as_ref().ok_or_else(|| ConfigError("missing [params] section".into()))?;
        HurstParams::new(p.h, p.m).map_err(|e| ConfigError(format!("[params]: {e}")))
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec, ConfigError> {
        let k = self.kernel.as_ref().ok_or_else(|| ConfigError("missing [kernel] section".into()))?;
        let h = self.hurst_params()?.h;
        KernelSpec::new(k.clone(), h).map_err(|e| ConfigError(format!("[kernel]: {e}")))
    }

    pub fn validate(&self) -> Result<(), Invalid> {
        if self.threads == Some(0) {
            return Err(Invalid::at("threads", "threads must be >= 1"));
        }
        if self.replicas == Some(0) {
            return Err(Invalid::at("replicas", "replicas must be >= 1"));
        }
        let needs_model = matches!(self.kind, ExperimentKind::Functional | ExperimentKind::Homogenize);
        if needs_model || self.kind == ExperimentKind::Simulate {
            if self.params.is_none() {
                return Err(Invalid::at("params", "missing [params] section"));
            }
            self.hurst_params().map_err(|e| Invalid::at("h", &e.0))?;
        }
        if needs_model {
            if self.kernel.is_none() {
                return Err(Invalid::at("kernel", "missing [kernel] section"));
            }
            self.kernel_spec().map_err(|e| Invalid::at("kernel", &e.0))?;
            if self.series.is_empty() {
                return Err(Invalid::at("series", "at least one [[series]] entry is required"));
            }
        }
        let mut ids = BTreeSet::new();
        for s in &self.series {
            if !ids.insert(s.id.as_str()) {
                return Err(Invalid::at("id", &format!("duplicate series id {:?}", s.id)));
            }
            s.to_series().map_err(|e| Invalid::at("coefficients", &format!("series {:?}: {e}", s.id)))?;
        }
        if self.kind != ExperimentKind::Decompose {
            self.check_declared_regimes()?;
        }
        if self.t_grid.is_empty() || self.t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Invalid::at("t_grid", "t_grid needs positive finite times"));
        }
        match self.kind {
            ExperimentKind::Decompose => {
                let d = self.decompose.as_ref().ok_or_else(|| Invalid::at("decompose", "missing [decompose] section"))?;
                if d.k < 1 || d.m < 1 {
                    return Err(Invalid::at("k", "decompose needs k >= 1 and m >= 1"));
                }
            }
            ExperimentKind::Simulate => {
                let s = self.simulate.as_ref().ok_or_else(|| Invalid::at("simulate", "missing [simulate] section"))?;
                if s.n_steps < 1 {
                    return Err(Invalid::at("n_steps", "n_steps must be >= 1"));
                }
                if s.process == ProcessKind::Volterra && self.kernel.is_none() {
                    return Err(Invalid::at("process", "a volterra simulation needs a [kernel] section"));
                }
            }
            ExperimentKind::Functional => {
                if self.eps.is_empty() {
                    return Err(Invalid::at("eps", "kind = \"functional\" needs a non-empty eps ladder"));
                }
                if self.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
                    return Err(Invalid::at("eps", "eps values must lie in (0, 1)"));
                }
            }
            ExperimentKind::Homogenize => {
                let h = self.homogenize.as_ref().ok_or_else(|| Invalid::at("homogenize", "missing [homogenize] section"))?;
                if let Some(id) = &h.series {
                    if !self.series.iter().any(|s| &s.id == id) {
                        return Err(Invalid::at("series", &format!("unknown series id {id:?}")));
                    }
                }
                h.field.validate().map_err(|e| Invalid::at("field", &e.to_string()))?;
            }
            ExperimentKind::Verify => {
                if let Some(v) = &self.verify {
                    crate::verify::select(&v.only).map_err(|e| Invalid::at("only", &e.0))?;
                }
            }
        }
        Ok(())
    }

    /// Boundary check for series whose rank is known without simulation.
    fn check_declared_regimes(&self) -> Result<(), Invalid> {
        let Ok(params) = self.hurst_params() else { return Ok(()) };
        for s in &self.series {
            if let Some(w) = s.declared_rank {
                if classify_regime(&params, w).is_boundary() {
                    return Err(Invalid::at(
                        "declared_rank",
                        &format!("series {:?} sits on the boundary H*(w) = 1/2", s.id),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Validation failure with the key it concerns.
#[derive(Debug, Clone, PartialEq)]
pub struct Invalid {
    pub key: Option<String>,
    pub message: String,
}

impl Invalid {
    pub fn at(key: &str, message: &str) -> Self {
        Self { key: Some(key.to_string()), message: message.to_string() }
    }
}

/// 1-based line of the first assignment `key = …` or header `[key]` / `[[key]]`.
pub fn locate(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|line| {
        let t = line.trim_start();
        let header = t.trim_start_matches('[').trim_end().trim_end_matches(']');
        if t.starts_with('[') {
            return header.trim() == key;
        }
        t.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}
