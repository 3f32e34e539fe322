use crate::error::{Error, Result};
use crate::special::ln_factorial;

/// log C₄(k, k′, m, d, 𝔏).
pub fn c4_bound_log(k: u32, k2: u32, m: u32, d: u32, frak_l: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidParameter("d = 0 (bound divides by d^2)".into()));
    }
    if k < 1 || k2 < 1 || m < 1 {
        return Err(Error::InvalidParameter("k, k', m must be >= 1".into()));
    }
    if d > k.min(k2) * m {
        return Err(Error::InvalidParameter(format!(
            "d = {d} exceeds min(k, k') m = {}",
            k.min(k2) * m
        )));
    }
    if !(frak_l > 0.0 && frak_l.is_finite()) {
        return Err(Error::InvalidParameter(format!("frak_L = {frak_l} must be positive")));
    }
    let (kf, k2f, mf) = (k as f64, k2 as f64, m as f64);
    let s = kf + k2f;
    Ok(0.5 * (ln_factorial((k * m) as u64) + ln_factorial((k2 * m) as u64))
        + s * ln_factorial(m as u64)
        + mf * s.ln()
        + 2.0 * (s * mf).ln()
        + s * mf.ln()
        + s * mf * frak_l.ln()
        - 2.0 * (d as f64).ln())
}

pub fn c4_bound(k: u32, k2: u32, m: u32, d: u32, frak_l: f64) -> Result<f64> {
    c4_bound_log(k, k2, m, d, frak_l).map(f64::exp)
}

/// 𝔏 = C₂(H₀) + 3 + ‖x‖_𝓗 + K.
pub fn frak_l(c2: f64, kernel_norm: f64, k: f64) -> f64 {
    c2 + 3.0 + kernel_norm + k
}
