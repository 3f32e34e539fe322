//! Gaussianity, cross-independence and Hölder diagnostics of functional samples.

use serde::{Deserialize, Serialize};

use super::sample::FunctionalSample;
use crate::chaos::Regime;
use crate::error::{Error, Result};
use crate::process::PathGrid;
use crate::stats::{
    bootstrap_se, bootstrap_se_pairs, correlation, covariance, excess_kurtosis, ks_normal,
    lilliefors_critical, mean, quantile_sorted, skewness, sorted, variance,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// |value − target| ≤ k·stderr.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.stderr
    }
}

pub const MIN_GAUSSIANITY_REPLICAS: usize = 1000;
pub const HOLDER_GAMMA: f64 = 0.45;
pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DiagnosticsReport {
    pub replicas: usize,
    pub excess_kurtosis: Option<Estimate>,
    pub skewness: Option<Estimate>,
    /// KS distance to the normal law with the sample's own mean and variance.
    pub ks_statistic: Option<Estimate>,
    pub ks_critical: Option<f64>,
    pub holder_gamma: Option<f64>,
    /// (probability, quantile) pairs of the per-replica Hölder seminorm on the T grid.
    pub holder_quantiles: Vec<(f64, f64)>,
    pub cross_covariance: Option<[[f64; 2]; 2]>,
    pub cross_covariance_stderr: Option<[[f64; 2]; 2]>,
    pub correlation: Option<Estimate>,
    /// Correlation of the squared components.
    pub independence_statistic: Option<Estimate>,
    pub independent: Option<bool>,
    pub label: Option<String>,
}

pub fn gaussianity_report(sample: &FunctionalSample) -> Result<DiagnosticsReport> {
    let n = sample.replicas();
    if n < MIN_GAUSSIANITY_REPLICAS {
        return Err(Error::Insufficient(format!(
            "Gaussianity diagnostics need >= {MIN_GAUSSIANITY_REPLICAS} replicas, got {n}"
        )));
    }
    let x = sample.terminal();
    let ks = |v: &[f64]| ks_normal(v, mean(v), variance(v).sqrt());
    let est = |f: &dyn Fn(&[f64]) -> f64| Estimate { value: f(&x), stderr: bootstrap_se(&x, f) };
    let mut report = DiagnosticsReport {
        replicas: n,
        excess_kurtosis: Some(est(&excess_kurtosis)),
        skewness: Some(est(&skewness)),
        ks_statistic: Some(est(&ks)),
        ks_critical: Some(lilliefors_critical(n, SIGNIFICANCE)),
        ..Default::default()
    };
    if sample.t_grid.len() >= 2 {
        let norms: Vec<f64> = sample
            .values
            .iter()
            .map(|row| holder_points(&sample.t_grid, row, HOLDER_GAMMA))
            .collect();
        let s = sorted(&norms);
        report.holder_gamma = Some(HOLDER_GAMMA);
        report.holder_quantiles = [0.5, 0.9, 0.99].iter().map(|&p| (p, quantile_sorted(&s, p))).collect();
    }
    if sample.regime.regime == Regime::LongRange {
        report.label = Some("LRD sample: expect non-Gaussian limit".into());
    }
    Ok(report)
}

/// Correlation of the terminal values and of their squares, with an independence verdict at 3 SE.
pub fn cross_independence(a: &FunctionalSample, b: &FunctionalSample) -> Result<DiagnosticsReport> {
    if a.replicas() != b.replicas() {
        return Err(Error::InvalidParameter(format!(
            "replica mismatch: {} vs {}",
            a.replicas(),
            b.replicas()
        )));
    }
    if a.replicas() < 3 {
        return Err(Error::Insufficient("cross diagnostics need at least 3 replicas".into()));
    }
    let (x, y) = (a.terminal(), b.terminal());
    let sq = |u: &[f64]| -> Vec<f64> { u.iter().map(|v| v * v).collect() };
    let corr_sq = |u: &[f64], v: &[f64]| correlation(&sq(u), &sq(v));
    let corr = Estimate { value: correlation(&x, &y), stderr: bootstrap_se_pairs(&x, &y, correlation) };
    let indep = Estimate { value: corr_sq(&x, &y), stderr: bootstrap_se_pairs(&x, &y, corr_sq) };
    let cov = [[variance(&x), covariance(&x, &y)], [covariance(&x, &y), variance(&y)]];
    let cov_se = [
        [bootstrap_se(&x, variance), bootstrap_se_pairs(&x, &y, covariance)],
        [bootstrap_se_pairs(&x, &y, covariance), bootstrap_se(&y, variance)],
    ];
    Ok(DiagnosticsReport {
        replicas: x.len(),
        cross_covariance: Some(cov),
        cross_covariance_stderr: Some(cov_se),
        independent: Some(corr.within(0.0, 3.0) && indep.within(0.0, 3.0)),
        correlation: Some(corr),
        independence_statistic: Some(indep),
        ..Default::default()
    })
}

fn holder_points(t: &[f64], x: &[f64], gamma: f64) -> f64 {
    let mut best = 0.0f64;
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            let dt = t[j] - t[i];
            if dt > 0.0 {
                best = best.max((x[j] - x[i]).abs() / dt.powf(gamma));
            }
        }
    }
    best
}

/// max over grid pairs of |X_t − X_s| / |t − s|^γ.
pub fn holder_seminorm(path: &PathGrid, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} outside (0, 1)")));
    }
    let t: Vec<f64> = (0..path.len()).map(|i| path.time(i)).collect();
    Ok(holder_points(&t, &path.values, gamma))
}
