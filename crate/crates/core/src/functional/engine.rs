//! Stationary moving-average sampler and the deterministic replica loop.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::HurstParams;
use crate::error::{Error, Result};
use crate::process::{
    check_history, convolve_at, hermite_source, hou_from_increments, volterra_weights,
    weights_variance, HermiteBackend, IncrementSource, KernelSpec, SimConfig,
};
use crate::rng::{fill_normal, stream_rng};

/// Discretization of the stationary process y; the ε-experiments only change the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSettings {
    pub dt: f64,
    pub history: f64,
    pub refinement: usize,
    pub richardson: bool,
    pub backend: HermiteBackend,
    pub far_history: Option<f64>,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self {
            dt: 0.05,
            history: 50.0,
            refinement: 2,
            richardson: true,
            backend: HermiteBackend::Quadrature,
            far_history: None,
        }
    }
}

impl SimSettings {
    pub fn sim_config(&self, n_steps: usize, seed: u64) -> SimConfig {
        SimConfig {
            n_steps,
            dt: self.dt,
            history: self.history,
            refinement: self.refinement,
            seed,
            replica: 0,
            richardson: self.richardson,
            backend: self.backend,
            far_history: self.far_history,
        }
    }
}

/// Generating model of y_t = ∫ x(t−s) dZ^{H,m}_s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub params: HurstParams,
    pub kernel: KernelSpec,
    pub settings: SimSettings,
}

impl Model {
    pub fn new(params: HurstParams, kernel: KernelSpec, settings: SimSettings) -> Self {
        Self { params, kernel, settings }
    }

    /// Sampler whose paths cover [0, horizon].
    pub fn sampler(&self, horizon: f64) -> Result<StationarySampler> {
        let n = (horizon / self.settings.dt - 1e-9).ceil().max(1.0) as usize;
        StationarySampler::new(&self.params, &self.kernel, n, &self.settings)
    }

    /// Exact variance of the discretized stationary marginal.
    pub fn marginal_variance(&self) -> Result<f64> {
        let cfg = self.settings.sim_config(1, 0);
        cfg.validate()?;
        Ok(discrete_variance(&self.kernel, self.params.h, &cfg))
    }
}

fn discrete_variance(kernel: &KernelSpec, hurst: f64, cfg: &SimConfig) -> f64 {
    let w = volterra_weights(|s| kernel.eval(s), cfg.fine_step(), cfg.history_steps(), cfg.richardson);
    weights_variance(&w, hurst, cfg.fine_step())
}

enum Scheme {
    Ou(f64),
    Convolution(Vec<f64>),
}

/// Maps a Gaussian noise vector to stationary paths y on n_steps + 1 grid points.
pub struct StationarySampler {
    source: Box<dyn IncrementSource>,
    scheme: Scheme,
    cfg: SimConfig,
    variance: f64,
}

impl StationarySampler {
    pub fn new(params: &HurstParams, kernel: &KernelSpec, n_steps: usize, settings: &SimSettings) -> Result<Self> {
        let cfg = settings.sim_config(n_steps, 0);
        cfg.validate()?;
        check_history(kernel, &cfg)?;
        let n_fine = cfg.history_steps() + n_steps * cfg.refinement;
        let source = hermite_source(params, n_fine, cfg.fine_step(), cfg.backend, cfg.far_history)?;
        let scheme = match kernel.exp_lambda() {
            Some(lambda) => Scheme::Ou(lambda),
            None => Scheme::Convolution(volterra_weights(
                |s| kernel.eval(s),
                cfg.fine_step(),
                cfg.history_steps(),
                cfg.richardson,
            )),
        };
        let variance = discrete_variance(kernel, params.h, &cfg);
        Ok(Self { source, scheme, cfg, variance })
    }

    pub fn n_steps(&self) -> usize {
        self.cfg.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.cfg.dt
    }

    pub fn noise_len(&self) -> usize {
        self.source.noise_len()
    }

    pub fn paths_per_noise(&self) -> usize {
        self.source.paths_per_noise()
    }

    pub fn marginal_variance(&self) -> f64 {
        self.variance
    }

    pub fn method(&self) -> String {
        let scheme = match self.scheme {
            Scheme::Ou(_) => "ou-recursion",
            Scheme::Convolution(_) => "young-convolution",
        };
        format!("{scheme} over {}", self.source.method())
    }

    pub fn paths_from_noise(&self, xi: &[f64]) -> Result<Vec<Vec<f64>>> {
        let burn = self.cfg.history_steps() / self.cfg.refinement;
        self.source
            .increments_from_noise(xi)
            .iter()
            .map(|dz| match &self.scheme {
                Scheme::Ou(lambda) => {
                    let y = hou_from_increments(
                        *lambda,
                        1.0,
                        0.0,
                        dz,
                        self.cfg.fine_step(),
                        self.cfg.refinement,
                        self.cfg.richardson,
                    )?;
                    Ok(y[burn..].to_vec())
                }
                Scheme::Convolution(w) => convolve_at(
                    w,
                    dz,
                    self.cfg.history_steps(),
                    self.cfg.refinement,
                    self.cfg.n_steps + 1,
                ),
            })
            .collect()
    }
}

/// Number of noise draws ("units") needed for `replicas` paths.
pub fn units_for(replicas: usize, per_noise: usize) -> usize {
    replicas.div_ceil(per_noise.max(1))
}

/// Apply `f` to the path of every replica 0..replicas and return the results in replica order.
///
/// Replicas are grouped by noise draw; draw u uses stream u of `seed`, so the output does
/// not depend on the number of worker threads.
pub fn replica_map<T: Send>(
    sampler: &StationarySampler,
    seed: u64,
    replicas: usize,
    f: impl Fn(usize, &[f64]) -> T + Sync,
) -> Result<Vec<T>> {
    let per = sampler.paths_per_noise();
    let chunks: Vec<Vec<T>> = (0..units_for(replicas, per))
        .into_par_iter()
        .map(|u| {
            let mut rng = stream_rng(seed, u as u64);
            let mut xi = vec![0.0; sampler.noise_len()];
            fill_normal(&mut rng, &mut xi);
            let paths = sampler.paths_from_noise(&xi)?;
            Ok(paths
                .iter()
                .enumerate()
                .map(|(j, p)| (u * per + j, p))
                .filter(|(i, _)| *i < replicas)
                .map(|(i, p)| f(i, p))
                .collect())
        })
        .collect::<Result<_>>()?;
    let out: Vec<T> = chunks.into_iter().flatten().collect();
    if out.len() != replicas {
        return Err(Error::Numerical(format!("expected {replicas} replicas, produced {}", out.len())));
    }
    Ok(out)
}
