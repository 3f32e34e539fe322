//! x^ε from the functional driver X^ε against the limit equation, at the terminal time.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::driver::lift_symmetric;
use super::field::VectorField;
use super::limit::{LimitSampler, LimitType};
use super::solver::{solve_rough_tol, solve_young_tol};
use super::weak::{weak_distance, WeakReport};
use crate::chaos::{classify_regime, Regime, RegimeClassification};
use crate::error::{Error, Result};
use crate::functional::{functional_samples, kappa_estimate, limit_covariance_srd, Model, SeriesEvaluator};
use crate::process::{HermiteBackend, PathGrid, PathMeta};
use crate::rng::derive_seed;
use crate::special::hermite_coefficients;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HomogenizationSpec {
    pub field: VectorField,
    pub x0: f64,
    pub eps: f64,
    /// Grid points of X^ε on [0, 1].
    pub grid_points: usize,
    pub replicas: usize,
    pub seed: u64,
    /// Lag cutoff and replicas for Λ (SRD).
    pub lambda_cutoff: f64,
    pub lambda_replicas: usize,
    /// ε values and replicas for κ (LRD).
    pub kappa_eps: Vec<f64>,
    pub kappa_replicas: usize,
    pub limit_backend: HermiteBackend,
    /// Step-halving tolerance of the per-replica solves; both ensembles share the scheme and grid.
    pub solver_tol: f64,
}

impl Default for HomogenizationSpec {
    fn default() -> Self {
        Self {
            field: VectorField::Linear { a: 1.0 },
            x0: 1.0,
            eps: 1e-3,
            grid_points: 1025,
            replicas: 2000,
            seed: 0,
            lambda_cutoff: 50.0,
            lambda_replicas: 4000,
            kappa_eps: vec![2e-3, 1e-3],
            kappa_replicas: 2000,
            limit_backend: HermiteBackend::Quadrature,
            solver_tol: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogenizationOutcome {
    pub regime: RegimeClassification,
    pub c: f64,
    pub c_stderr: f64,
    pub limit: LimitType,
    pub terminal_eps: Vec<f64>,
    pub terminal_limit: Vec<f64>,
    pub weak: WeakReport,
    /// Largest step-halving discrepancy over both ensembles.
    pub max_solver_error: f64,
    pub pass: bool,
}

/// Sign of the rank-w projection, which fixes the orientation of the Hermite limit (m = 1).
fn limit_sign(eval: &SeriesEvaluator, model: &Model) -> Result<f64> {
    if model.params.m != 1 {
        return Ok(1.0);
    }
    let a = hermite_coefficients(&eval.centered, model.marginal_variance()?.sqrt());
    Ok(a.get(eval.rank as usize).map_or(1.0, |v| if *v < 0.0 { -1.0 } else { 1.0 }))
}

pub fn run_homogenization(eval: &SeriesEvaluator, model: &Model, spec: &HomogenizationSpec) -> Result<HomogenizationOutcome> {
    spec.field.validate()?;
    if spec.grid_points < 3 {
        return Err(Error::InvalidParameter("need at least 3 grid points on [0, 1]".into()));
    }
    let regime = classify_regime(&model.params, eval.rank);
    let (c, c_stderr, limit) = match regime.regime {
        Regime::Boundary => return Err(Error::Boundary("homogenization limit excluded at H*(w) = 1/2".into())),
        Regime::ShortRange => {
            let lam = limit_covariance_srd(
                eval,
                eval,
                model,
                spec.lambda_cutoff,
                spec.lambda_replicas,
                derive_seed(spec.seed, "lambda"),
            )?;
            if !(lam.value > 0.0) {
                return Err(Error::Numerical(format!("estimated limit variance {} is not positive", lam.value)));
            }
            let c = lam.value.sqrt();
            (c, 0.5 * lam.stderr / c, LimitType::StratonovichWiener)
        }
        Regime::LongRange => {
            let k = kappa_estimate(eval, model, &spec.kappa_eps, spec.kappa_replicas, derive_seed(spec.seed, "kappa"))?;
            let sign = limit_sign(eval, model)?;
            (sign * k.value, k.stderr, LimitType::YoungHermite { params: model.params.clone(), w: eval.rank })
        }
    };
    let n = spec.grid_points - 1;
    let dt = 1.0 / n as f64;
    let t_grid: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
    let sample = functional_samples(
        std::slice::from_ref(eval),
        model,
        spec.eps,
        &t_grid,
        spec.replicas,
        derive_seed(spec.seed, "paths"),
    )?
    .swap_remove(0);
    let young = matches!(limit, LimitType::YoungHermite { .. });
    let solve = |x: &PathGrid| -> Result<(f64, f64)> {
        let sol = if young {
            solve_young_tol(&spec.field, x, spec.x0, spec.solver_tol)?
        } else {
            solve_rough_tol(&spec.field, &lift_symmetric(x), spec.x0, spec.solver_tol)?
        };
        Ok((*sol.values.last().expect("non-empty"), sol.meta.error_estimate.unwrap_or(0.0)))
    };
    let eps_runs: Vec<(f64, f64)> = sample
        .values
        .par_iter()
        .map(|row| solve(&PathGrid::new(0.0, dt, row.clone(), PathMeta { method: "functional".into(), ..Default::default() })?))
        .collect::<Result<_>>()?;
    let sampler = LimitSampler::new(&spec.field, c, spec.x0, &limit, n, dt, spec.limit_backend, None)?;
    let limit_seed = derive_seed(spec.seed, "limit");
    let limit_runs: Vec<(f64, f64)> = (0..spec.replicas as u64)
        .into_par_iter()
        .map(|r| solve(&sampler.driver(limit_seed, r)?))
        .collect::<Result<_>>()?;
    let max_solver_error = eps_runs.iter().chain(&limit_runs).map(|r| r.1).fold(0.0, f64::max);
    let terminal_eps: Vec<f64> = eps_runs.into_iter().map(|r| r.0).collect();
    let terminal_limit: Vec<f64> = limit_runs.into_iter().map(|r| r.0).collect();
    let weak = weak_distance(&terminal_eps, &terminal_limit);
    Ok(HomogenizationOutcome {
        regime,
        c,
        c_stderr,
        limit,
        terminal_eps,
        terminal_limit,
        pass: weak.ks_pass(),
        weak,
        max_solver_error,
    })
}
