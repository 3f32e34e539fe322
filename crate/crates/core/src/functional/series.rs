//! Pointwise evaluation of centered power series along a path.

use serde::{Deserialize, Serialize};

use super::engine::{replica_map, Model};
use crate::chaos::{chaos_rank_with, PowerSeries, RankOptions};
use crate::error::{Error, Result};
use crate::process::PathGrid;
use crate::rng::derive_seed;
use crate::special::{gaussian_moment, hermite_coefficients};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    None,
    #[default]
    Mean,
    /// Subtract the projections onto chaoses below the declared rank (m = 1 only).
    Projection,
}

/// Absolute projection energy below which a chaos counts as empty.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CenteringOptions {
    /// Stationary samples for the m ≥ 2 mean calibration.
    pub calibration_samples: usize,
    pub seed: u64,
    pub rank_tol: f64,
    pub rank: RankOptions,
}

impl Default for CenteringOptions {
    fn default() -> Self {
        Self { calibration_samples: 200_000, seed: 0xca1b, rank_tol: DEFAULT_RANK_TOL, rank: RankOptions::default() }
    }
}

/// E[y^k] for k = 0..=n under the discretized stationary law.
pub fn stationary_moments(model: &Model, n: usize, opts: &CenteringOptions) -> Result<Vec<f64>> {
    if model.params.m == 1 {
        let s = model.marginal_variance()?.sqrt();
        return Ok((0..=n).map(|k| gaussian_moment(k) * s.powi(k as i32)).collect());
    }
    let horizon = 50.0;
    let sampler = model.sampler(horizon)?;
    let per_path = sampler.n_steps() + 1;
    let replicas = opts.calibration_samples.div_ceil(per_path).max(1);
    let sums = replica_map(&sampler, derive_seed(opts.seed, "calibration"), replicas, |_, y| {
        let mut s = vec![0.0; n + 1];
        for &v in y {
            let mut p = 1.0;
            for sk in s.iter_mut() {
                *sk += p;
                p *= v;
            }
        }
        s
    })?;
    let total = (replicas * per_path) as f64;
    Ok((0..=n).map(|k| sums.iter().map(|s| s[k]).sum::<f64>() / total).collect())
}

/// A series bound to a model: its chaos rank and the centered polynomial actually evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEvaluator {
    pub id: String,
    pub series: PowerSeries,
    pub centering: Centering,
    pub rank: u32,
    pub centered: Vec<f64>,
}

impl SeriesEvaluator {
    pub fn new(id: &str, series: &PowerSeries, model: &Model, centering: Centering) -> Result<Self> {
        Self::with_options(id, series, model, centering, &CenteringOptions::default())
    }

    pub fn with_options(
        id: &str,
        series: &PowerSeries,
        model: &Model,
        centering: Centering,
        opts: &CenteringOptions,
    ) -> Result<Self> {
        series.validate()?;
        let mut centered = series.coefficients.clone();
        let rank = match centering {
            Centering::Projection => {
                if model.params.m != 1 {
                    return Err(Error::Unsupported(
                        "projection centering needs Gaussian y (m = 1)".into(),
                    ));
                }
                let w = series.declared_rank.ok_or_else(|| {
                    Error::InvalidParameter("projection centering needs a declared rank".into())
                })?;
                let sigma = model.marginal_variance()?.sqrt();
                let a = hermite_coefficients(&series.coefficients, sigma);
                for (d, &ad) in a.iter().enumerate().take(w as usize) {
                    let he = PowerSeries::hermite(d).coefficients;
                    for (k, hk) in he.iter().enumerate() {
                        centered[k] -= ad * hk / sigma.powi(k as i32);
                    }
                }
                w
            }
            Centering::Mean => {
                let mu = stationary_moments(model, series.coefficients.len() - 1, opts)?;
                centered[0] -= series.coefficients.iter().zip(&mu).map(|(c, m)| c * m).sum::<f64>();
                rank_of(series, model, opts)?
            }
            Centering::None => rank_of(series, model, opts)?,
        };
        Ok(Self { id: id.to_string(), series: series.clone(), centering, rank, centered })
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.centered.iter().rev().fold(0.0, |acc, &c| acc * y + c)
    }
}

fn rank_of(series: &PowerSeries, model: &Model, opts: &CenteringOptions) -> Result<u32> {
    let est = chaos_rank_with(series, &model.params, &model.kernel, opts.rank_tol, &opts.rank)?;
    Ok(est.rank)
}

/// G(y_t) along the path with the evaluator's centering.
pub fn evaluate_series(eval: &SeriesEvaluator, path: &PathGrid) -> PathGrid {
    path.map(|y| eval.eval(y))
}
