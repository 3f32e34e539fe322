//! Scaling exponents, SRD limit covariances and LRD amplitudes from replica ensembles.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::engine::{replica_map, Model};
use super::sample::{functional_samples, interpolant_integrals};
use super::series::SeriesEvaluator;
use crate::chaos::{classify_regime, Regime, RegimeClassification};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::stats::{bootstrap_se, group_jackknife_se, mean, ols, variance};

pub const JACKKNIFE_GROUPS: usize = 20;

/// ε ladder used when a configuration does not give one.
pub fn default_eps_ladder() -> Vec<f64> {
    vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3]
}

pub fn eps_seed(seed: u64, eps: f64) -> u64 {
    derive_seed(seed, &format!("eps={eps:e}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingEstimate {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    /// 1 for SRD, (2H₀−2)w + 2 for LRD, none at the boundary.
    pub predicted: Option<f64>,
    pub regime: RegimeClassification,
    pub flag: Option<String>,
    pub log_inv_eps: Vec<f64>,
    pub log_var: Vec<f64>,
    pub replicas: usize,
}

/// Predicted growth exponent of Var ∫_0^{1/ε} G(y) dt in 1/ε.
pub fn predicted_slope(model: &Model, w: u32) -> Option<f64> {
    let c = classify_regime(&model.params, w);
    match c.regime {
        Regime::ShortRange => Some(1.0),
        Regime::LongRange => Some((2.0 * model.params.h0 - 2.0) * w as f64 + 2.0),
        Regime::Boundary => None,
    }
}

fn check_ladder(eps: &[f64], min_points: usize) -> Result<()> {
    if eps.len() < min_points {
        return Err(Error::InvalidParameter(format!(
            "eps ladder needs at least {min_points} points, got {}",
            eps.len()
        )));
    }
    if eps.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
        return Err(Error::InvalidParameter("eps values must lie in (0, 1]".into()));
    }
    let mut logs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    logs.sort_by(f64::total_cmp);
    let gaps: Vec<f64> = logs.windows(2).map(|w| w[1] - w[0]).collect();
    let (lo, hi) = gaps.iter().fold((f64::INFINITY, 0.0f64), |(a, b), g| (a.min(*g), b.max(*g)));
    if lo <= 0.0 || hi > 1.5 * lo {
        return Err(Error::InvalidParameter("eps ladder must be geometrically spaced".into()));
    }
    Ok(())
}

/// Raw integrals ∫_0^{1/ε} G(y_t) dt for every replica.
fn raw_integrals(eval: &SeriesEvaluator, model: &Model, eps: f64, replicas: usize, seed: u64) -> Result<Vec<f64>> {
    let horizon = 1.0 / eps;
    let sampler = model.sampler(horizon)?;
    let dt = sampler.dt();
    replica_map(&sampler, seed, replicas, |_, y| {
        let g: Vec<f64> = y.iter().map(|&v| eval.eval(v)).collect();
        interpolant_integrals(&g, dt, &[horizon]).map(|v| v[0])
    })?
    .into_iter()
    .collect()
}

/// Log-log regression of Var ∫_0^{1/ε} G(y) dt on 1/ε with a delete-a-group jackknife error.
pub fn scaling_exponent(
    eval: &SeriesEvaluator,
    model: &Model,
    eps_ladder: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<ScalingEstimate> {
    check_ladder(eps_ladder, 4)?;
    if replicas < 2 * JACKKNIFE_GROUPS {
        return Err(Error::Insufficient(format!(
            "{replicas} replicas; need at least {} for the jackknife error",
            2 * JACKKNIFE_GROUPS
        )));
    }
    let data: Vec<Vec<f64>> = eps_ladder
        .iter()
        .map(|&e| raw_integrals(eval, model, e, replicas, eps_seed(seed, e)))
        .collect::<Result<_>>()?;
    scaling_fit(eps_ladder, &data, model, eval.rank)
}

/// Scaling regression on given raw integrals ∫_0^{1/ε} G (data[i] belongs to eps[i]).
pub fn scaling_fit(eps: &[f64], data: &[Vec<f64>], model: &Model, rank: u32) -> Result<ScalingEstimate> {
    check_ladder(eps, 4)?;
    let replicas = data.iter().map(|d| d.len()).min().unwrap_or(0);
    if data.len() != eps.len() || data.iter().any(|d| d.len() != replicas) {
        return Err(Error::InvalidParameter("one equal-size replica set per eps value is required".into()));
    }
    if replicas < 2 * JACKKNIFE_GROUPS {
        return Err(Error::Insufficient(format!(
            "{replicas} replicas; need at least {} for the jackknife error",
            2 * JACKKNIFE_GROUPS
        )));
    }
    let regime = classify_regime(&model.params, rank);
    let x: Vec<f64> = eps.iter().map(|e| -e.ln()).collect();
    let fit_without = |skip: std::ops::Range<usize>| -> f64 {
        let y: Vec<f64> = data
            .iter()
            .map(|d| {
                let kept: Vec<f64> = d
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !skip.contains(i))
                    .map(|(_, v)| *v)
                    .collect();
                variance(&kept).ln()
            })
            .collect();
        ols(&x, &y).slope
    };
    let log_var: Vec<f64> = data.iter().map(|d| variance(d).ln()).collect();
    if log_var.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite variance on the eps ladder".into()));
    }
    let fit = ols(&x, &log_var);
    let stderr = group_jackknife_se(replicas, JACKKNIFE_GROUPS, fit_without);
    let flag = regime
        .is_boundary()
        .then(|| "boundary H*(w) = 1/2: variance grows like (1/eps)|ln eps|, no slope asserted".to_string());
    Ok(ScalingEstimate {
        slope: fit.slope,
        stderr,
        intercept: fit.intercept,
        predicted: predicted_slope(model, rank),
        regime,
        flag,
        log_inv_eps: x,
        log_var,
        replicas,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Statistical part of the error.
    pub mc_stderr: f64,
    /// Fitted power-law tail beyond the cutoff, included in `value`.
    pub tail: f64,
    /// Systematic allowance for the tail model.
    pub tail_bound: f64,
    pub lag_cutoff: f64,
    pub lags: Vec<f64>,
    /// Mean of E[A(y_s)B(y_0)] + E[B(y_s)A(y_0)] at each lag.
    pub covariance: Vec<f64>,
    pub replicas: usize,
}

/// Path length relative to the lag cutoff used for lag covariances.
pub const LAMBDA_PATH_FACTOR: f64 = 10.0;

/// Λ = ∫_0^∞ E[A(y_s)B(y_0) + B(y_s)A(y_0)] ds, i.e. 2∫_0^∞ cov for A = B.
pub fn limit_covariance_srd(
    a: &SeriesEvaluator,
    b: &SeriesEvaluator,
    model: &Model,
    lag_cutoff: f64,
    replicas: usize,
    seed: u64,
) -> Result<LambdaEstimate> {
    for e in [a, b] {
        let c = classify_regime(&model.params, e.rank);
        if c.regime != Regime::ShortRange {
            return Err(Error::InvalidParameter(format!(
                "series {} has H*(w) = {:.4} >= 1/2; the covariance formula covers SRD series only",
                e.id, c.h_star
            )));
        }
    }
    if replicas < 2 {
        return Err(Error::Insufficient("limit covariance needs at least 2 replicas".into()));
    }
    let dt = model.settings.dt;
    let nlag = (lag_cutoff / dt).round() as usize;
    if nlag < 4 {
        return Err(Error::InvalidParameter(format!("lag cutoff {lag_cutoff} spans fewer than 4 steps")));
    }
    let sampler = model.sampler(LAMBDA_PATH_FACTOR * lag_cutoff)?;
    let n = sampler.n_steps() + 1;
    let len = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let rows: Vec<Vec<f64>> = replica_map(&sampler, seed, replicas, |_, y| {
        // pack A + iB, so one forward transform serves both series
        let mut buf: Vec<Complex<f64>> = (0..len)
            .map(|i| if i < n { Complex::new(a.eval(y[i]), b.eval(y[i])) } else { Complex::new(0.0, 0.0) })
            .collect();
        fwd.process(&mut buf);
        let mut prod = vec![Complex::new(0.0, 0.0); len];
        for k in 0..len {
            let z = buf[k];
            let zc = buf[(len - k) % len].conj();
            let fa = (z + zc) * 0.5;
            let fb = (z - zc) * Complex::new(0.0, -0.5);
            // Σ_t A_t B_{t+τ} + B_t A_{t+τ} ↔ conj(FA)FB + conj(FB)FA
            prod[k] = fa.conj() * fb + fb.conj() * fa;
        }
        inv.process(&mut prod);
        (0..=nlag).map(|tau| prod[tau].re / len as f64 / (n - tau) as f64).collect()
    })?;
    let lags: Vec<f64> = (0..=nlag).map(|i| i as f64 * dt).collect();
    let p = (2.0 * model.params.h0 - 2.0) * a.rank.max(b.rank) as f64;
    let per: Vec<(f64, f64)> = rows.iter().map(|c| lambda_from_covariance(c, &lags, p)).collect();
    let totals: Vec<f64> = per.iter().map(|(s, t)| s + t).collect();
    let value = mean(&totals);
    let mc = (variance(&totals) / replicas as f64).sqrt();
    let tail = mean(&per.iter().map(|p| p.1).collect::<Vec<_>>());
    let tail_bound = 0.5 * tail.abs();
    let covariance = (0..=nlag).map(|i| rows.iter().map(|r| r[i]).sum::<f64>() / replicas as f64).collect();
    Ok(LambdaEstimate {
        value,
        stderr: (mc * mc + tail_bound * tail_bound).sqrt(),
        mc_stderr: mc,
        tail,
        tail_bound,
        lag_cutoff: lags[nlag],
        lags,
        covariance,
        replicas,
    })
}

/// Trapezoid integral over the lag grid plus a fixed-exponent power-law tail fitted on [cut/2, cut].
fn lambda_from_covariance(c: &[f64], lags: &[f64], p: f64) -> (f64, f64) {
    let n = c.len() - 1;
    let dt = lags[1] - lags[0];
    let body: f64 = c.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).sum();
    let (mut num, mut den) = (0.0, 0.0);
    for i in n / 2..=n {
        let s = lags[i].powf(p);
        num += c[i] * s;
        den += s * s;
    }
    let amp = num / den;
    let cut = lags[n];
    let tail = if p < -1.0 { amp * cut.powf(p + 1.0) / (-(p + 1.0)) } else { f64::NAN };
    (body, tail)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaEstimate {
    pub value: f64,
    pub stderr: f64,
    pub eps: Vec<f64>,
    /// ‖Ḡ^ε_1‖_{L²} per ε with bootstrap errors.
    pub norms: Vec<f64>,
    pub norm_stderr: Vec<f64>,
    pub discrepancy: f64,
}

fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

/// κ = lim ‖Ḡ^ε_1‖_{L²}: mean of the two smallest-ε norms, their gap folded into the error.
pub fn kappa_estimate(
    eval: &SeriesEvaluator,
    model: &Model,
    eps_ladder: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<KappaEstimate> {
    let c = classify_regime(&model.params, eval.rank);
    if c.regime != Regime::LongRange {
        return Err(Error::InvalidParameter(format!(
            "series {} has H*(w) = {:.4} <= 1/2; kappa is defined for LRD series",
            eval.id, c.h_star
        )));
    }
    if eps_ladder.len() < 2 {
        return Err(Error::InvalidParameter("kappa needs at least two eps values".into()));
    }
    if replicas < 2 {
        return Err(Error::Insufficient("kappa needs at least 2 replicas".into()));
    }
    let mut eps = eps_ladder.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let terminals: Vec<Vec<f64>> = eps
        .iter()
        .map(|&e| {
            let s = functional_samples(std::slice::from_ref(eval), model, e, &[1.0], replicas, eps_seed(seed, e))?;
            Ok(s[0].terminal())
        })
        .collect::<Result<_>>()?;
    kappa_from_terminal(&eps, &terminals)
}

/// κ from terminal values Ḡ^ε_1 per ε (any order of `eps`).
pub fn kappa_from_terminal(eps: &[f64], terminals: &[Vec<f64>]) -> Result<KappaEstimate> {
    if eps.len() < 2 || eps.len() != terminals.len() || terminals.iter().any(|t| t.len() < 2) {
        return Err(Error::InvalidParameter("kappa needs two or more eps values with >= 2 replicas each".into()));
    }
    let mut order: Vec<usize> = (0..eps.len()).collect();
    order.sort_by(|&a, &b| eps[b].total_cmp(&eps[a]));
    let norms: Vec<f64> = order.iter().map(|&i| rms(&terminals[i])).collect();
    let ses: Vec<f64> = order.iter().map(|&i| bootstrap_se(&terminals[i], rms)).collect();
    let eps: Vec<f64> = order.iter().map(|&i| eps[i]).collect();
    let k = eps.len();
    let (n1, n2) = (norms[k - 1], norms[k - 2]);
    let (s1, s2) = (ses[k - 1], ses[k - 2]);
    let discrepancy = (n1 - n2).abs();
    Ok(KappaEstimate {
        value: 0.5 * (n1 + n2),
        stderr: (0.25 * (s1 * s1 + s2 * s2) + 0.25 * discrepancy * discrepancy).sqrt(),
        eps,
        norms,
        norm_stderr: ses,
        discrepancy,
    })
}
