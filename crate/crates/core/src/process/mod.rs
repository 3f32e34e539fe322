//! Path simulation: fBm, Hermite processes, Volterra moving averages and Hermite–OU.

pub mod fgn;
pub mod hermite;
pub mod io;
pub mod kernel;
pub mod source;
pub mod volterra;

use serde::{Deserialize, Serialize};

use crate::chaos::HurstParams;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

pub use fgn::{fgn_autocov, FgnGenerator};
pub use hermite::{HermiteSumGenerator, RosenblattGenerator};
pub use kernel::{default_validation_lags, validate_kernel, KernelReport, KernelSpec, KernelVariant};
pub use source::{hermite_source, FbmIncrements, HermiteBackend, IncrementSource};
pub use volterra::{convolve_at, hou_from_increments, volterra_weights, weights_variance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_steps: usize,
    pub dt: f64,
    /// Lower integration limit −L replacing −∞.
    pub history: f64,
    /// Fine steps per output step for the Young sums.
    pub refinement: usize,
    pub seed: u64,
    #[serde(default)]
    pub replica: u64,
    #[serde(default = "default_true")]
    pub richardson: bool,
    #[serde(default)]
    pub backend: HermiteBackend,
    /// Far-history cut of the rank-2 quadrature backend, in units of the horizon.
    #[serde(default)]
    pub far_history: Option<f64>,
}

fn default_true() -> bool {
    true
}

impl SimConfig {
    pub fn new(n_steps: usize, dt: f64, seed: u64) -> Self {
        Self {
            n_steps,
            dt,
            history: 50.0,
            refinement: 2,
            seed,
            replica: 0,
            richardson: true,
            backend: HermiteBackend::Quadrature,
            far_history: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps < 1 {
            return Err(Error::InvalidParameter("n_steps must be >= 1".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.history > 0.0) {
            return Err(Error::InvalidParameter("history truncation L must be > 0".into()));
        }
        if self.refinement < 1 {
            return Err(Error::InvalidParameter("refinement must be >= 1".into()));
        }
        if self.richardson && self.refinement % 2 != 0 {
            return Err(Error::InvalidParameter(
                "Richardson extrapolation needs an even refinement".into(),
            ));
        }
        Ok(())
    }

    pub fn fine_step(&self) -> f64 {
        self.dt / self.refinement as f64
    }

    /// Fine history length, rounded up to whole (even) output steps.
    pub fn history_steps(&self) -> usize {
        let n = (self.history / self.fine_step() - 1e-9).ceil() as usize;
        let q = if self.refinement % 2 == 0 { self.refinement } else { 2 * self.refinement };
        n.div_ceil(q) * q
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct PathMeta {
    pub seed: u64,
    pub replica: u64,
    pub method: String,
    pub truncation: Option<f64>,
    /// Exact variance of the discretized marginal where computable.
    pub marginal_variance: Option<f64>,
    /// Relative variance bias of the discretization where computable.
    pub bias_estimate: Option<f64>,
    /// Step-halving discrepancy of an ODE solve.
    #[serde(default)]
    pub error_estimate: Option<f64>,
    pub warnings: Vec<String>,
}

/// Path sampled on t0, t0 + dt, …
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathGrid {
    pub t0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
    pub meta: PathMeta,
}

impl PathGrid {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>, meta: PathMeta) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidParameter("a path needs at least 2 values".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
        }
        Ok(Self { t0, dt, values, meta })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.values.len() - 1)
    }

    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            t0: self.t0,
            dt: self.dt,
            values: self.values.iter().map(|&v| f(v)).collect(),
            meta: self.meta.clone(),
        }
    }

    /// Every k-th point.
    pub fn subsample(&self, k: usize) -> Self {
        Self {
            t0: self.t0,
            dt: self.dt * k as f64,
            values: self.values.iter().step_by(k).copied().collect(),
            meta: self.meta.clone(),
        }
    }
}

pub(crate) fn cumulative(dz: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(dz.len() + 1);
    let mut s = 0.0;
    out.push(0.0);
    for d in dz {
        s += d;
        out.push(s);
    }
    out
}

fn first_draw(src: &dyn IncrementSource, cfg: &SimConfig) -> Vec<f64> {
    let mut rng = stream_rng(cfg.seed, cfg.replica);
    src.sample(&mut rng).swap_remove(0)
}

pub fn simulate_fbm(h: f64, cfg: &SimConfig) -> Result<PathGrid> {
    cfg.validate()?;
    if !(h > 0.5 && h < 1.0) {
        return Err(Error::InvalidParameter(format!("H = {h} outside (1/2, 1)")));
    }
    let src = FbmIncrements::new(h, cfg.n_steps, cfg.dt)?;
    let dz = first_draw(&src, cfg);
    let meta = PathMeta {
        seed: cfg.seed,
        replica: cfg.replica,
        method: src.method(),
        ..Default::default()
    };
    PathGrid::new(0.0, cfg.dt, cumulative(&dz), meta)
}

pub fn simulate_hermite(params: &HurstParams, cfg: &SimConfig) -> Result<PathGrid> {
    cfg.validate()?;
    if params.m == 1 {
        return simulate_fbm(params.h, cfg);
    }
    let src = hermite_source(params, cfg.n_steps, cfg.dt, cfg.backend, cfg.far_history)?;
    let dz = first_draw(src.as_ref(), cfg);
    let mut meta = PathMeta {
        seed: cfg.seed,
        replica: cfg.replica,
        method: src.method(),
        ..Default::default()
    };
    if params.m == 2 && cfg.backend == HermiteBackend::Quadrature {
        let gen = RosenblattGenerator::new(params, cfg.n_steps, 1.0, cfg.far_history)?;
        meta.truncation = Some(gen.far_history);
        if gen.tail_estimate > 1e-3 {
            meta.warnings.push(format!(
                "history cut leaves relative variance bias {:.3e}",
                gen.tail_estimate
            ));
        }
    }
    PathGrid::new(0.0, cfg.dt, cumulative(&dz), meta)
}

/// Increments of Z on the fine grid over [−L, T] for a moving-average simulation.
fn driver_increments(params: &HurstParams, cfg: &SimConfig) -> Result<(Vec<f64>, String)> {
    let n_fine = cfg.history_steps() + cfg.n_steps * cfg.refinement;
    let src = hermite_source(params, n_fine, cfg.fine_step(), cfg.backend, cfg.far_history)?;
    Ok((first_draw(src.as_ref(), cfg), src.method()))
}

pub(crate) fn check_history(kernel: &KernelSpec, cfg: &SimConfig) -> Result<()> {
    let need = 5.0 * kernel.effective_support();
    if cfg.history < need {
        return Err(Error::InvalidParameter(format!(
            "history L = {} below 5x the kernel's effective support ({need:.3})",
            cfg.history
        )));
    }
    Ok(())
}

/// Moving average driven by the given fine increments (history block first).
pub fn volterra_from_increments(
    kernel: &KernelSpec,
    dz: &[f64],
    cfg: &SimConfig,
) -> Result<Vec<f64>> {
    let hist = cfg.history_steps();
    let w = volterra_weights(|s| kernel.eval(s), cfg.fine_step(), hist, cfg.richardson);
    convolve_at(&w, dz, hist, cfg.refinement, cfg.n_steps + 1)
}

pub fn simulate_volterra(kernel: &KernelSpec, params: &HurstParams, cfg: &SimConfig) -> Result<PathGrid> {
    cfg.validate()?;
    let report = validate_kernel(kernel, params.h, &default_validation_lags())?;
    if !report.pass {
        return Err(Error::KernelInvalid(report.diagnostics.join("; ")));
    }
    check_history(kernel, cfg)?;
    let (dz, method) = driver_increments(params, cfg)?;
    let y = volterra_from_increments(kernel, &dz, cfg)?;
    let hist = cfg.history_steps();
    let w = volterra_weights(|s| kernel.eval(s), cfg.fine_step(), hist, cfg.richardson);
    let var = weights_variance(&w, params.h, cfg.fine_step());
    let meta = PathMeta {
        seed: cfg.seed,
        replica: cfg.replica,
        method: format!("volterra-young(r={}, richardson={}) over {method}", cfg.refinement, cfg.richardson),
        truncation: Some(hist as f64 * cfg.fine_step()),
        marginal_variance: Some(var),
        bias_estimate: Some(var / report.weighted_norm.max(f64::MIN_POSITIVE) - 1.0)
            .filter(|_| kernel.variant_is_nonnegative()),
        error_estimate: None,
        warnings: Vec::new(),
    };
    PathGrid::new(0.0, cfg.dt, y, meta)
}

/// Exact discrete marginal variance of the Hermite–OU scheme with unit σ.
pub fn hou_discrete_variance(lambda: f64, hurst: f64, cfg: &SimConfig) -> f64 {
    let w = volterra_weights(|s| (-lambda * s).exp(), cfg.fine_step(), cfg.history_steps(), cfg.richardson);
    weights_variance(&w, hurst, cfg.fine_step())
}

pub fn simulate_hou(lambda: f64, sigma: f64, params: &HurstParams, cfg: &SimConfig) -> Result<PathGrid> {
    cfg.validate()?;
    if !(lambda > 0.0 && sigma > 0.0) {
        return Err(Error::InvalidParameter("lambda and sigma must be positive".into()));
    }
    let (dz, method) = driver_increments(params, cfg)?;
    let y = hou_from_increments(lambda, sigma, 0.0, &dz, cfg.fine_step(), cfg.refinement, cfg.richardson)?;
    let burn = cfg.history_steps() / cfg.refinement;
    let tail_steps = cfg.history_steps() % cfg.refinement;
    debug_assert_eq!(tail_steps, 0);
    let exact = crate::special::gamma(2.0 * params.h + 1.0) / 2.0 * lambda.powf(-2.0 * params.h);
    let var = sigma * sigma * hou_discrete_variance(lambda, params.h, cfg);
    let meta = PathMeta {
        seed: cfg.seed,
        replica: cfg.replica,
        method: format!("hermite-ou(r={}, richardson={}) over {method}", cfg.refinement, cfg.richardson),
        truncation: Some(cfg.history_steps() as f64 * cfg.fine_step()),
        marginal_variance: Some(var),
        bias_estimate: Some(var / (sigma * sigma * exact) - 1.0),
        error_estimate: None,
        warnings: Vec::new(),
    };
    PathGrid::new(0.0, cfg.dt, y[burn..].to_vec(), meta)
}
