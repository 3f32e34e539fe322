use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{beta, ln_factorial};

/// Hurst index and chaos rank of a Hermite process, with derived kernel exponent and constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurstParams {
    pub h: f64,
    pub m: u32,
    pub h0: f64,
    /// K with K² B(H₀−½, 2−2H₀) = H(2H−1).
    pub k: f64,
}

pub fn make_params(h: f64, m: u32) -> Result<HurstParams> {
    HurstParams::new(h, m)
}

impl HurstParams {
    pub fn new(h: f64, m: u32) -> Result<Self> {
        if !(h > 0.5 && h < 1.0) {
            return Err(Error::InvalidParameter(format!("H = {h} outside (1/2, 1)")));
        }
        if m < 1 {
            return Err(Error::InvalidParameter("rank m must be >= 1".into()));
        }
        let h0 = 1.0 + (h - 1.0) / m as f64;
        let k = (h * (2.0 * h - 1.0) / beta(h0 - 0.5, 2.0 - 2.0 * h0)).sqrt();
        Ok(Self { h, m, h0, k })
    }

    /// Beta factor B(H₀−½, 2−2H₀) appearing in the kernel inner products.
    pub fn beta_factor(&self) -> f64 {
        beta(self.h0 - 0.5, 2.0 - 2.0 * self.h0)
    }

    /// Constant making Var(Z_1) = 1 for the rank-m multiple integral:
    /// K_m² m! B^m = H(2H−1). Coincides with `k` when m = 1.
    pub fn unit_variance_constant(&self) -> f64 {
        let m = self.m as f64;
        let ln = (self.h * (2.0 * self.h - 1.0)).ln()
            - ln_factorial(self.m as u64)
            - m * self.beta_factor().ln();
        (0.5 * ln).exp()
    }

    pub fn h_star(&self, d: u32) -> f64 {
        h_star(self, d)
    }

    pub fn classify(&self, d: u32) -> RegimeClassification {
        classify_regime(self, d)
    }
}

/// H*(d) = (H₀−1)d + 1, evaluated as (H−1)(d/m) + 1 so that H*(m) = H exactly.
pub fn h_star(params: &HurstParams, d: u32) -> f64 {
    (params.h - 1.0) * (d as f64 / params.m as f64) + 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    ShortRange,
    LongRange,
    Boundary,
}

/// Tolerance within which H*(d) is treated as exactly 1/2.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeClassification {
    pub h_star: f64,
    pub regime: Regime,
    pub scaling_exponent: f64,
    pub flag: Option<String>,
}

impl RegimeClassification {
    pub fn is_boundary(&self) -> bool {
        self.regime == Regime::Boundary
    }
}

pub fn classify_regime(params: &HurstParams, d: u32) -> RegimeClassification {
    let hs = h_star(params, d);
    let regime = if (hs - 0.5).abs() <= BOUNDARY_TOL {
        Regime::Boundary
    } else if hs < 0.5 {
        Regime::ShortRange
    } else {
        Regime::LongRange
    };
    let flag = (regime == Regime::Boundary)
        .then(|| "H*(d) = 1/2 is excluded from the limit theorems".to_string());
    RegimeClassification {
        h_star: hs,
        regime,
        scaling_exponent: hs.max(0.5),
        flag,
    }
}

/// α(ε) = ε^{H*(w) ∨ 1/2}.
pub fn scaling_alpha(params: &HurstParams, w: u32, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1]")));
    }
    let c = classify_regime(params, w);
    if c.is_boundary() {
        return Err(Error::Boundary(format!(
            "H = {}, m = {}, w = {w} gives H*(w) = 1/2",
            params.h, params.m
        )));
    }
    Ok(eps.powf(c.scaling_exponent))
}
