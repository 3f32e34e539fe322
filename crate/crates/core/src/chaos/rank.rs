//! Chaos rank of G(y): exact Hermite rank for Gaussian y, Mehler Monte Carlo otherwise.

use serde::{Deserialize, Serialize};

use super::params::HurstParams;
use super::series::PowerSeries;
use crate::error::{Error, Result};
use crate::functional::{SimSettings, StationarySampler};
use crate::process::{HermiteBackend, KernelSpec};
use crate::rng::{fill_normal, stream_rng};
use crate::special::{hermite_coefficients, ln_factorial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMethod {
    Declared,
    ExactHermite,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEstimate {
    pub rank: u32,
    pub method: RankMethod,
    /// Projection energies ‖P_d G(y)‖², index d (entry 0 unused).
    pub energies: Vec<f64>,
    pub stderr: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RankOptions {
    pub samples: usize,
    pub rho: Vec<f64>,
    pub batches: usize,
    pub seed: u64,
    /// Highest chaos degree in the fit; defaults to deg(G)·m capped by the ρ grid.
    pub max_degree: Option<usize>,
    pub settings: SimSettings,
}

impl Default for RankOptions {
    fn default() -> Self {
        Self {
            samples: 2000,
            rho: (1..=10).map(|i| i as f64 / 10.0).collect(),
            batches: 20,
            seed: 0x7a2c,
            max_degree: None,
            settings: SimSettings { dt: 0.25, ..SimSettings::default() },
        }
    }
}

pub fn chaos_rank(series: &PowerSeries, params: &HurstParams, kernel: &KernelSpec, tol: f64) -> Result<u32> {
    Ok(chaos_rank_with(series, params, kernel, tol, &RankOptions::default())?.rank)
}

pub fn chaos_rank_with(
    series: &PowerSeries,
    params: &HurstParams,
    kernel: &KernelSpec,
    tol: f64,
    opts: &RankOptions,
) -> Result<RankEstimate> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol = {tol} must be positive")));
    }
    series.validate()?;
    if let Some(w) = series.declared_rank {
        return Ok(RankEstimate { rank: w, method: RankMethod::Declared, energies: vec![], stderr: vec![] });
    }
    if series.coefficients.iter().skip(1).all(|&c| c == 0.0) {
        return Err(Error::InvalidParameter("series is constant: trivial after centering".into()));
    }
    if params.m == 1 {
        exact_rank(series, kernel, tol)
    } else {
        monte_carlo_rank(series, params, kernel, tol, opts)
    }
}

fn exact_rank(series: &PowerSeries, kernel: &KernelSpec, tol: f64) -> Result<RankEstimate> {
    let sigma = kernel.stationary_variance.sqrt();
    let a = hermite_coefficients(&series.coefficients, sigma);
    let energies: Vec<f64> = a
        .iter()
        .enumerate()
        .map(|(d, v)| if d == 0 { 0.0 } else { ln_factorial(d as u64).exp() * v * v })
        .collect();
    let rank = (1..energies.len())
        .find(|&d| energies[d] > tol)
        .ok_or_else(|| Error::Indeterminate(format!("no projection energy exceeds tol = {tol}")))?;
    let stderr = vec![0.0; energies.len()];
    Ok(RankEstimate { rank: rank as u32, method: RankMethod::ExactHermite, energies, stderr })
}

/// Mehler: Cov(F(ξ), F(ρξ + √(1−ρ²)ξ')) = Σ_{d≥1} ρ^d ‖P_d F‖² on the driving noise.
fn monte_carlo_rank(
    series: &PowerSeries,
    params: &HurstParams,
    kernel: &KernelSpec,
    tol: f64,
    opts: &RankOptions,
) -> Result<RankEstimate> {
    if opts.rho.is_empty() || opts.rho.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
        return Err(Error::InvalidParameter("rho grid must lie in (0, 1]".into()));
    }
    let batches = opts.batches.max(2);
    if opts.samples < 10 * batches {
        return Err(Error::Insufficient(format!(
            "{} samples is too few for {batches} batches",
            opts.samples
        )));
    }
    let mut settings = opts.settings.clone();
    if params.m > 2 {
        settings.backend = HermiteBackend::HermiteSum;
    }
    let sampler = StationarySampler::new(params, kernel, 1, &settings)?;
    let max_d = opts
        .max_degree
        .unwrap_or(series.degree() * params.m as usize)
        .clamp(1, opts.rho.len());
    let nr = opts.rho.len();
    let y0 = |xi: &[f64]| -> Result<f64> { Ok(sampler.paths_from_noise(xi)?[0][0]) };
    let per_batch = opts.samples / batches;
    let mut fits = Vec::with_capacity(batches);
    for b in 0..batches {
        let mut acc = vec![[0.0f64; 3]; nr];
        let mut f0_sum = 0.0;
        for i in 0..per_batch {
            let mut rng = stream_rng(opts.seed, (b * per_batch + i) as u64);
            let mut xi = vec![0.0; sampler.noise_len()];
            let mut xi2 = vec![0.0; sampler.noise_len()];
            fill_normal(&mut rng, &mut xi);
            fill_normal(&mut rng, &mut xi2);
            let f0 = series.eval(y0(&xi)?);
            f0_sum += f0;
            for (j, &rho) in opts.rho.iter().enumerate() {
                let c = (1.0 - rho * rho).max(0.0).sqrt();
                let mixed: Vec<f64> = xi.iter().zip(&xi2).map(|(a, b)| rho * a + c * b).collect();
                let f = series.eval(y0(&mixed)?);
                acc[j][0] += f0 * f;
                acc[j][1] += f;
            }
        }
        let n = per_batch as f64;
        let m0 = f0_sum / n;
        let cov: Vec<f64> = acc.iter().map(|a| a[0] / n - m0 * a[1] / n).collect();
        fits.push(nnls_powers(&opts.rho, &cov, max_d));
    }
    let mut energies = vec![0.0; max_d + 1];
    let mut stderr = vec![0.0; max_d + 1];
    for d in 1..=max_d {
        let v: Vec<f64> = fits.iter().map(|f| f[d]).collect();
        energies[d] = crate::stats::mean(&v);
        stderr[d] = (crate::stats::variance(&v) / batches as f64).sqrt();
    }
    let rank = (1..=max_d).find(|&d| energies[d] > tol).ok_or_else(|| {
        Error::Indeterminate(format!("no projection energy exceeds tol = {tol} (max degree {max_d})"))
    })?;
    let ambiguous_low = (1..rank).any(|d| energies[d] + 2.0 * stderr[d] > tol);
    if energies[rank] - 2.0 * stderr[rank] <= tol || ambiguous_low {
        return Err(Error::Indeterminate(format!(
            "rank {rank} energy {:.3e} ± {:.3e} not separated from tol {tol}",
            energies[rank], stderr[rank]
        )));
    }
    Ok(RankEstimate { rank: rank as u32, method: RankMethod::MonteCarlo, energies, stderr })
}

/// Non-negative least squares fit of cov(ρ) ≈ Σ_{d=1}^{D} E_d ρ^d (Lawson–Hanson active set).
fn nnls_powers(rho: &[f64], cov: &[f64], max_d: usize) -> Vec<f64> {
    let cols: Vec<Vec<f64>> = (1..=max_d).map(|d| rho.iter().map(|r| r.powi(d as i32)).collect()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let n = cols.len();
    let mut x = vec![0.0; n];
    let mut passive = vec![false; n];
    let resid = |x: &[f64]| -> Vec<f64> {
        (0..rho.len()).map(|i| cov[i] - (0..n).map(|j| cols[j][i] * x[j]).sum::<f64>()).collect()
    };
    for _ in 0..3 * n + 10 {
        let r = resid(&x);
        let grad: Vec<f64> = cols.iter().map(|c| dot(c, &r)).collect();
        let cand = (0..n).filter(|&j| !passive[j]).max_by(|&a, &b| grad[a].total_cmp(&grad[b]));
        match cand {
            Some(j) if grad[j] > 1e-14 * (1.0 + dot(cov, cov).sqrt()) => passive[j] = true,
            _ => break,
        }
        loop {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let z = least_squares(&idx.iter().map(|&j| cols[j].as_slice()).collect::<Vec<_>>(), cov);
            if z.iter().all(|&v| v > 0.0) {
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = z[k];
                }
                break;
            }
            // step back toward the feasible set and drop the first variable that hits zero
            let mut alpha = 1.0f64;
            for (k, &j) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    alpha = alpha.min(x[j] / (x[j] - z[k]));
                }
            }
            for (k, &j) in idx.iter().enumerate() {
                x[j] += alpha * (z[k] - x[j]);
                if x[j] <= 1e-15 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    let mut e = vec![0.0; max_d + 1];
    e[1..].copy_from_slice(&x);
    e
}

/// Unconstrained least squares via the normal equations (small, dense).
fn least_squares(cols: &[&[f64]], y: &[f64]) -> Vec<f64> {
    let k = cols.len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = cols[i].iter().zip(cols[j]).map(|(p, q)| p * q).sum();
        }
        a[i][k] = cols[i].iter().zip(y).map(|(p, q)| p * q).sum();
    }
    for c in 0..k {
        let p = (c..k).max_by(|&r, &s| a[r][c].abs().total_cmp(&a[s][c].abs())).unwrap_or(c);
        a.swap(c, p);
        let piv = a[c][c];
        if piv.abs() < 1e-300 {
            continue;
        }
        for r in 0..k {
            if r != c {
                let f = a[r][c] / piv;
                for q in c..=k {
                    a[r][q] -= f * a[c][q];
                }
            }
        }
    }
    (0..k).map(|i| if a[i][i].abs() < 1e-300 { 0.0 } else { a[i][k] / a[i][i] }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nnls_recovers_pure_power() {
        let rho: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
        let cov: Vec<f64> = rho.iter().map(|r| 0.7 * r * r).collect();
        let e = nnls_powers(&rho, &cov, 4);
        assert!((e[2] - 0.7).abs() < 1e-6, "{e:?}");
        assert!(e[1].abs() < 1e-6 && e[3].abs() < 1e-6);
    }
}
