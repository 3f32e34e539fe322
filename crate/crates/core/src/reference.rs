//! Independent quadrature oracles for Gaussian (m = 1) moving averages.

use quadrature::double_exponential;

use crate::error::{Error, Result};
use crate::special::{gamma, ln_factorial, upper_gamma};

const QUAD_TOL: f64 = 1e-12;

/// e^x Γ(s, x) without overflow.
fn scaled_upper_gamma(s: f64, x: f64) -> f64 {
    if x <= 0.0 {
        gamma(s)
    } else if x < 30.0 {
        x.exp() * upper_gamma(s, x)
    } else {
        scaled_upper_gamma_quad(s, x)
    }
}

/// e^x Γ(s,x) = ∫_0^∞ e^{−t} (x + t)^{s−1} dt.
fn scaled_upper_gamma_quad(s: f64, x: f64) -> f64 {
    double_exponential::integrate(|t| (-t).exp() * (x + t).powf(s - 1.0), 0.0, 80.0, QUAD_TOL).integral
}

/// Stationary covariance E[y_u y_0] of y_t = ∫_{−∞}^t e^{−λ(t−s)} dB^H_s.
pub fn fou_covariance(lambda: f64, hurst: f64, u: f64) -> f64 {
    let beta = 2.0 * hurst - 2.0;
    let u = u.abs();
    let lb = lambda.powf(-beta - 1.0);
    let left = (-lambda * u).exp() * gamma(beta + 1.0) * lb;
    let right = lb * scaled_upper_gamma(beta + 1.0, lambda * u);
    // J(u) = ∫_0^u e^{−λ(u−z)} z^β dz, with z = u t^{1/(β+1)} removing the singularity
    let mid = if u > 0.0 {
        let p = 1.0 / (beta + 1.0);
        let scale = u.powf(beta + 1.0) / (beta + 1.0);
        scale * double_exponential::integrate(|t| (-lambda * u * (1.0 - t.powf(p))).exp(), 0.0, 1.0, QUAD_TOL).integral
    } else {
        0.0
    };
    hurst * (2.0 * hurst - 1.0) / (2.0 * lambda) * (left + mid + right)
}

/// Cov(G_a(y_s), G_b(y_0)) = Σ_{d≥1} d! a_d b_d ρ(s)^d for Hermite coefficients a, b of G(σZ).
pub fn gaussian_functional_covariance(a: &[f64], b: &[f64], rho: f64) -> f64 {
    (1..a.len().min(b.len()))
        .map(|d| ln_factorial(d as u64).exp() * a[d] * b[d] * rho.powi(d as i32))
        .sum()
}

/// Λ_ab = 2∫_0^∞ Cov(G_a(y_s), G_b(y_0)) ds for a Gaussian stationary y with covariance `cov`.
///
/// `asymptote = (c, β)` gives cov(s) ≈ c s^β beyond `cutoff`, used for the analytic tail.
pub fn gaussian_limit_covariance(
    a: &[f64],
    b: &[f64],
    cov: impl Fn(f64) -> f64,
    cutoff: f64,
    asymptote: (f64, f64),
) -> Result<f64> {
    let var = cov(0.0);
    if !(var > 0.0) {
        return Err(Error::InvalidParameter("degenerate stationary variance".into()));
    }
    let w = (1..a.len().min(b.len()))
        .find(|&d| a[d] * b[d] != 0.0)
        .ok_or_else(|| Error::InvalidParameter("series share no chaos".into()))?;
    let (c, beta) = asymptote;
    if beta * w as f64 >= -1.0 {
        return Err(Error::InvalidParameter("covariance is not integrable (LRD)".into()));
    }
    let f = |s: f64| gaussian_functional_covariance(a, b, cov(s) / var);
    // integrate on unit panels so the quadrature sees smooth pieces
    let mut body = 0.0;
    let mut lo = 0.0;
    while lo < cutoff {
        let hi = (lo + 1.0).min(cutoff);
        body += double_exponential::integrate(f, lo, hi, QUAD_TOL).integral;
        lo = hi;
    }
    // tail: Σ_d d! a_d b_d (c s^β / var)^d integrated over [cutoff, ∞)
    let tail: f64 = (w..a.len().min(b.len()))
        .map(|d| {
            let p = beta * d as f64;
            if p < -1.0 {
                ln_factorial(d as u64).exp() * a[d] * b[d] * (c / var).powi(d as i32) * cutoff.powf(p + 1.0) / (-(p + 1.0))
            } else {
                0.0
            }
        })
        .sum();
    Ok(2.0 * (body + tail))
}
