//! Moving-average kernels and their integrability/decay certificate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelVariant {
    Exponential { lambda: f64 },
    Tabulated { lags: Vec<f64>, values: Vec<f64>, decay_exponent: f64 },
}

/// Kernel x on [0, ∞) with its L¹ norm and |𝓗| norm for a given H.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub variant: KernelVariant,
    pub hurst: f64,
    pub l1_norm: f64,
    pub weighted_norm: f64,
    /// Var(y) = H(2H−1) ∫∫ x(u)x(v)|u−v|^{2H−2} for a unit-variance driver.
    pub stationary_variance: f64,
}

/// Mass fraction of ∫|x| allowed beyond the effective support.
const SUPPORT_MASS: f64 = 1e-3;

impl KernelSpec {
    pub fn new(variant: KernelVariant, hurst: f64) -> Result<Self> {
        if !(hurst > 0.5 && hurst < 1.0) {
            return Err(Error::InvalidParameter(format!("H = {hurst} outside (1/2, 1)")));
        }
        match &variant {
            KernelVariant::Exponential { lambda } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
                }
            }
            KernelVariant::Tabulated { lags, values, .. } => {
                if lags.len() < 2 || lags.len() != values.len() {
                    return Err(Error::InvalidParameter(
                        "tabulated kernel needs >= 2 lags with matching values".into(),
                    ));
                }
                if lags[0] != 0.0 || lags.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidParameter(
                        "tabulated lags must start at 0 and increase strictly".into(),
                    ));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("tabulated values must be finite".into()));
                }
            }
        }
        let mut spec = Self {
            variant,
            hurst,
            l1_norm: 0.0,
            weighted_norm: 0.0,
            stationary_variance: 0.0,
        };
        let grid = spec.signed_grid();
        let abs: Vec<f64> = grid.values.iter().map(|v| v.abs()).collect();
        spec.l1_norm = trapezoid(&abs, grid.step);
        let c = hurst * (2.0 * hurst - 1.0) * 2.0;
        spec.weighted_norm = c * power_moment(&autocorrelation(&abs, grid.step), grid.step, 2.0 * hurst - 2.0);
        spec.stationary_variance = if spec.variant_is_nonnegative() {
            spec.weighted_norm
        } else {
            c * power_moment(&autocorrelation(&grid.values, grid.step), grid.step, 2.0 * hurst - 2.0)
        };
        Ok(spec)
    }

    pub fn exponential(lambda: f64, hurst: f64) -> Result<Self> {
        Self::new(KernelVariant::Exponential { lambda }, hurst)
    }

    pub fn tabulated(lags: Vec<f64>, values: Vec<f64>, decay_exponent: f64, hurst: f64) -> Result<Self> {
        Self::new(KernelVariant::Tabulated { lags, values, decay_exponent }, hurst)
    }

    /// Same kernel re-normed for another Hurst index.
    pub fn with_hurst(&self, hurst: f64) -> Result<Self> {
        Self::new(self.variant.clone(), hurst)
    }

    pub fn eval(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        match &self.variant {
            KernelVariant::Exponential { lambda } => (-lambda * s).exp(),
            KernelVariant::Tabulated { lags, values, .. } => {
                let last = *lags.last().unwrap();
                if s > last {
                    return 0.0;
                }
                let i = match lags.binary_search_by(|x| x.partial_cmp(&s).unwrap()) {
                    Ok(i) => return values[i],
                    Err(i) => i,
                };
                let (l0, l1) = (lags[i - 1], lags[i]);
                let w = (s - l0) / (l1 - l0);
                values[i - 1] * (1.0 - w) + values[i] * w
            }
        }
    }

    pub fn variant_is_nonnegative(&self) -> bool {
        match &self.variant {
            KernelVariant::Exponential { .. } => true,
            KernelVariant::Tabulated { values, .. } => values.iter().all(|v| *v >= 0.0),
        }
    }

    pub fn exp_lambda(&self) -> Option<f64> {
        match self.variant {
            KernelVariant::Exponential { lambda } => Some(lambda),
            _ => None,
        }
    }

    /// Smallest S with ∫_S^∞ |x| ≤ 1e−3 ∫|x|.
    pub fn effective_support(&self) -> f64 {
        match &self.variant {
            KernelVariant::Exponential { lambda } => (1.0 / SUPPORT_MASS).ln() / lambda,
            KernelVariant::Tabulated { lags, values, .. } => {
                let mut tail = 0.0;
                let total = self.l1_norm;
                for i in (1..lags.len()).rev() {
                    let piece = 0.5 * (values[i].abs() + values[i - 1].abs()) * (lags[i] - lags[i - 1]);
                    if tail + piece > SUPPORT_MASS * total {
                        return lags[i];
                    }
                    tail += piece;
                }
                lags[0]
            }
        }
    }

    /// Extent of the kernel's support used for quadrature.
    fn extent(&self) -> f64 {
        match &self.variant {
            KernelVariant::Exponential { lambda } => 40.0 / lambda,
            KernelVariant::Tabulated { lags, .. } => *lags.last().unwrap(),
        }
    }

    fn abs_grid(&self) -> Grid {
        let mut g = self.signed_grid();
        g.values.iter_mut().for_each(|v| *v = v.abs());
        g
    }

    fn signed_grid(&self) -> Grid {
        let extent = self.extent();
        let step = match &self.variant {
            KernelVariant::Exponential { lambda } => 0.005 / lambda,
            KernelVariant::Tabulated { lags, .. } => {
                let min_gap = lags.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
                min_gap.max(extent / 20_000.0)
            }
        };
        let n = (extent / step).ceil() as usize;
        let values = (0..=n).map(|i| self.eval(i as f64 * step)).collect();
        Grid { step, values }
    }

    /// D(t) = ∫∫ |x(t−u)||x(−v)| |u−v|^{2H−2} du dv.
    pub fn decay_profile(&self, lags: &[f64]) -> Vec<f64> {
        let grid = self.abs_grid();
        let acf = autocorrelation(&grid.values, grid.step);
        let beta = 2.0 * self.hurst - 2.0;
        let n = acf.len();
        lags.iter()
            .map(|&t| {
                let mut s = 0.0;
                for i in 0..n - 1 {
                    let (w0, w1) = (i as f64 * grid.step, (i + 1) as f64 * grid.step);
                    // A is even: ∫ A(w)(|t+w|^β + |t−w|^β) over w ≥ 0.
                    s += shifted_linear_power(w0, w1, acf[i], acf[i + 1], t, beta);
                    s += shifted_linear_power(-w1, -w0, acf[i + 1], acf[i], t, beta);
                }
                s
            })
            .collect()
    }
}

struct Grid {
    step: f64,
    values: Vec<f64>,
}

fn trapezoid(v: &[f64], h: f64) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]))
}

/// A(τ) = ∫ f(u) f(u+τ) du on the grid lags τ = kh, trapezoid rule via FFT.
fn autocorrelation(v: &[f64], h: f64) -> Vec<f64> {
    use rustfft::num_complex::Complex;
    use rustfft::FftPlanner;
    let n = v.len();
    let len = (2 * n).next_power_of_two();
    let mut w: Vec<f64> = v.to_vec();
    w[0] *= 0.5_f64.sqrt();
    w[n - 1] *= 0.5_f64.sqrt();
    let mut buf: Vec<Complex<f64>> = (0..len)
        .map(|i| Complex::new(if i < n { w[i] } else { 0.0 }, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    (0..n).map(|k| buf[k].re / len as f64 * h).collect()
}

/// ∫_0^∞ A(τ) τ^β dτ for A linear between grid points.
fn power_moment(acf: &[f64], step: f64, beta: f64) -> f64 {
    (0..acf.len() - 1)
        .map(|i| {
            let (t0, t1) = (i as f64 * step, (i + 1) as f64 * step);
            linear_times_power(t0, t1, acf[i], acf[i + 1], beta)
        })
        .sum()
}

/// ∫_{u0}^{u1} (a + b u) u^β du for 0 ≤ u0 < u1, with a + b u linear from f0 to f1.
fn linear_times_power(u0: f64, u1: f64, f0: f64, f1: f64, beta: f64) -> f64 {
    let b = (f1 - f0) / (u1 - u0);
    let a = f0 - b * u0;
    let p1 = beta + 1.0;
    let p2 = beta + 2.0;
    a * (u1.powf(p1) - u0.powf(p1)) / p1 + b * (u1.powf(p2) - u0.powf(p2)) / p2
}

/// ∫_{w0}^{w1} A(w) |t+w|^β dw with A linear from f0 (at w0) to f1 (at w1).
fn shifted_linear_power(w0: f64, w1: f64, f0: f64, f1: f64, t: f64, beta: f64) -> f64 {
    let (z0, z1) = (t + w0, t + w1);
    let slope = (f1 - f0) / (w1 - w0);
    let at = |z: f64| f0 + slope * (z - z0);
    let mut s = 0.0;
    if z1 > 0.0 {
        let lo = z0.max(0.0);
        s += linear_times_power(lo, z1, at(lo), at(z1), beta);
    }
    if z0 < 0.0 {
        let hi = z1.min(0.0);
        // u = −z runs over [−hi, −z0]
        s += linear_times_power(-hi, -z0, at(hi), at(z0), beta);
    }
    s
}

/// Outcome of the integrability and decay checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub pass: bool,
    pub l1_norm: f64,
    pub weighted_norm: f64,
    pub lags: Vec<f64>,
    pub profile: Vec<f64>,
    pub fitted_constant: f64,
    pub max_log_residual: f64,
    pub tail_slope: f64,
    pub target_slope: f64,
    pub diagnostics: Vec<String>,
}

/// Residual band (natural log) within which D(t)/(1 ∧ t^{2H−2}) counts as bounded.
pub const CERT_LOG_BAND: f64 = std::f64::consts::LN_10;
/// Allowed excess of the tail log-log slope over 2H−2.
pub const CERT_SLOPE_TOL: f64 = 0.1;

pub fn default_validation_lags() -> Vec<f64> {
    (0..=24).map(|i| 10f64.powf(i as f64 / 8.0)).collect()
}

pub fn validate_kernel(kernel: &KernelSpec, hurst: f64, lags: &[f64]) -> Result<KernelReport> {
    if lags.is_empty() || lags.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidParameter("validation lags must be non-empty and positive".into()));
    }
    let k = if (kernel.hurst - hurst).abs() > 0.0 {
        kernel.with_hurst(hurst)?
    } else {
        kernel.clone()
    };
    let beta = 2.0 * hurst - 2.0;
    let mut diagnostics = Vec::new();
    let mut pass = true;
    if !(k.l1_norm.is_finite() && k.l1_norm > 0.0) {
        diagnostics.push(format!("L1 norm {} not finite and positive", k.l1_norm));
        pass = false;
    }
    if !(k.weighted_norm.is_finite() && k.weighted_norm > 0.0) {
        diagnostics.push(format!("weighted norm {} not finite and positive", k.weighted_norm));
        pass = false;
    }
    let profile = k.decay_profile(lags);
    let ratios: Vec<f64> = lags
        .iter()
        .zip(&profile)
        .map(|(&t, &d)| d / t.powf(beta).min(1.0))
        .collect();
    let (fitted_constant, max_log_residual) = if ratios.iter().all(|r| *r > 0.0 && r.is_finite()) {
        let logs: Vec<f64> = ratios.iter().map(|r| r.ln()).collect();
        let c = logs.iter().sum::<f64>() / logs.len() as f64;
        let res = logs.iter().map(|l| (l - c).abs()).fold(0.0, f64::max);
        (c.exp(), res)
    } else {
        (0.0, f64::INFINITY)
    };
    if max_log_residual > CERT_LOG_BAND {
        diagnostics.push(format!(
            "profile leaves the band c(1 ∧ t^(2H-2)) by a factor {:.2}",
            max_log_residual.exp()
        ));
        pass = false;
    }
    let tail: Vec<(f64, f64)> = lags
        .iter()
        .zip(&profile)
        .filter(|(&t, &d)| t >= 1.0 && d > 0.0)
        .map(|(&t, &d)| (t.ln(), d.ln()))
        .collect();
    let tail = &tail[tail.len() / 2..];
    let tail_slope = if tail.len() >= 2 {
        crate::stats::ols(&tail.iter().map(|p| p.0).collect::<Vec<_>>(), &tail.iter().map(|p| p.1).collect::<Vec<_>>()).slope
    } else {
        f64::NAN
    };
    if !(tail_slope <= beta + CERT_SLOPE_TOL) {
        diagnostics.push(format!(
            "tail log-log slope {tail_slope:.3} exceeds target {beta:.3} + {CERT_SLOPE_TOL}"
        ));
        pass = false;
    }
    Ok(KernelReport {
        pass,
        l1_norm: k.l1_norm,
        weighted_norm: k.weighted_norm,
        lags: lags.to_vec(),
        profile,
        fitted_constant,
        max_log_residual,
        tail_slope,
        target_slope: beta,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;

    #[test]
    fn exponential_norms_match_closed_form() {
        let h = 0.7;
        let k = KernelSpec::exponential(2.0, h).unwrap();
        assert!((k.l1_norm - 0.5).abs() < 1e-4);
        let exact = h * (2.0 * h - 1.0) * gamma(2.0 * h - 1.0) * 2f64.powf(-2.0 * h);
        assert!((k.weighted_norm / exact - 1.0).abs() < 2e-3, "{} vs {exact}", k.weighted_norm);
    }

    #[test]
    fn tabulated_interpolates_and_vanishes_beyond_grid() {
        let k = KernelSpec::tabulated(vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.0], -1.0, 0.7).unwrap();
        assert_eq!(k.eval(0.5), 0.75);
        assert_eq!(k.eval(3.0), 0.0);
        assert_eq!(k.eval(-1.0), 0.0);
        assert!((k.l1_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_integration_exact_for_constants() {
        let v = linear_times_power(0.0, 2.0, 1.0, 1.0, -0.4);
        assert!((v - 2f64.powf(0.6) / 0.6).abs() < 1e-12);
        let s = shifted_linear_power(-3.0, 1.0, 1.0, 1.0, 1.0, -0.4);
        let exact = (2f64.powf(0.6) + 2f64.powf(0.6)) / 0.6;
        assert!((s - exact).abs() < 1e-12);
    }
}
