//! Normalized functionals ε^{H*(w) ∨ 1/2} ∫_0^{T/ε} G(y_t) dt over replica ensembles.

use serde::{Deserialize, Serialize};

use super::engine::{replica_map, Model};
use super::series::SeriesEvaluator;
use crate::chaos::{classify_regime, scaling_alpha, RegimeClassification};
use crate::error::{Error, Result};
use crate::process::PathGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSample {
    pub eps: f64,
    pub t_grid: Vec<f64>,
    /// values[replica][j] at t_grid[j].
    pub values: Vec<Vec<f64>>,
    pub regime: RegimeClassification,
    pub series_id: String,
    pub noise_seed: u64,
}

impl FunctionalSample {
    pub fn replicas(&self) -> usize {
        self.values.len()
    }

    /// Values at the last grid time across replicas.
    pub fn terminal(&self) -> Vec<f64> {
        self.values.iter().map(|r| *r.last().expect("non-empty grid")).collect()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[j]).collect()
    }
}

/// ∫_0^u of the linear interpolant of g (sampled at 0, dt, 2dt, …) for each u in `upper`.
pub fn interpolant_integrals(g: &[f64], dt: f64, upper: &[f64]) -> Result<Vec<f64>> {
    let end = (g.len() - 1) as f64 * dt;
    let mut cum = Vec::with_capacity(g.len());
    let mut s = 0.0;
    cum.push(0.0);
    for w in g.windows(2) {
        s += 0.5 * dt * (w[0] + w[1]);
        cum.push(s);
    }
    upper
        .iter()
        .map(|&u| {
            if u < 0.0 || u > end * (1.0 + 1e-12) + 1e-12 {
                return Err(Error::Insufficient(format!("path covers [0, {end}], integral needs [0, {u}]")));
            }
            let pos = (u / dt).min((g.len() - 1) as f64);
            let i = (pos.floor() as usize).min(g.len() - 2);
            let f = pos - i as f64;
            if f == 0.0 {
                return Ok(cum[i]);
            }
            let gi = g[i] + f * (g[i + 1] - g[i]);
            Ok(cum[i] + 0.5 * f * dt * (g[i] + gi))
        })
        .collect()
}

/// Ḡ^ε_T for every T in `t_grid` from a path of G(y) starting at t = 0.
pub fn normalized_functional(
    gpath: &PathGrid,
    eps: f64,
    regime: &RegimeClassification,
    t_grid: &[f64],
) -> Result<Vec<f64>> {
    if regime.is_boundary() {
        return Err(Error::Boundary("normalized functional undefined at H*(w) = 1/2".into()));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1]")));
    }
    let alpha = eps.powf(regime.scaling_exponent);
    let upper: Vec<f64> = t_grid.iter().map(|t| t / eps).collect();
    Ok(interpolant_integrals(&gpath.values, gpath.dt, &upper)?
        .into_iter()
        .map(|v| alpha * v)
        .collect())
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() || t_grid.windows(2).any(|w| w[1] < w[0]) || t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::InvalidParameter("T grid must be sorted within [0, 1]".into()));
    }
    Ok(())
}

/// Functional samples of several series on shared noise; one sample per evaluator.
pub fn functional_samples(
    evals: &[SeriesEvaluator],
    model: &Model,
    eps: f64,
    t_grid: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<Vec<FunctionalSample>> {
    check_grid(t_grid)?;
    let regimes: Vec<RegimeClassification> = evals.iter().map(|e| classify_regime(&model.params, e.rank)).collect();
    for (e, r) in evals.iter().zip(&regimes) {
        scaling_alpha(&model.params, e.rank, eps).map_err(|err| match err {
            Error::Boundary(msg) => Error::Boundary(format!("series {}: {msg}", e.id)),
            other => other,
        })?;
        debug_assert!(!r.is_boundary());
    }
    let t_max = t_grid.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let sampler = model.sampler(t_max / eps)?;
    let dt = sampler.dt();
    let upper: Vec<f64> = t_grid.iter().map(|t| t / eps).collect();
    let rows = replica_map(&sampler, seed, replicas, |_, y| -> Result<Vec<Vec<f64>>> {
        evals
            .iter()
            .zip(&regimes)
            .map(|(e, r)| {
                let g: Vec<f64> = y.iter().map(|&v| e.eval(v)).collect();
                let alpha = eps.powf(r.scaling_exponent);
                Ok(interpolant_integrals(&g, dt, &upper)?.into_iter().map(|v| alpha * v).collect())
            })
            .collect()
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(evals
        .iter()
        .zip(regimes)
        .enumerate()
        .map(|(k, (e, regime))| FunctionalSample {
            eps,
            t_grid: t_grid.to_vec(),
            values: rows.iter().map(|r| r[k].clone()).collect(),
            regime,
            series_id: e.id.clone(),
            noise_seed: seed,
        })
        .collect())
}
