use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ln_factorial;

/// What lies beyond the stored coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SeriesTail {
    /// Polynomial: all further coefficients vanish.
    #[default]
    Zero,
    /// Truncation of an infinite series whose remaining coefficients obey |c_k| ≤ C/k!.
    Bounded,
}

/// G(x) = Σ c_k x^k with |c_k| ≤ C/k!.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    pub coefficients: Vec<f64>,
    pub growth_bound: f64,
    pub declared_rank: Option<u32>,
    #[serde(default)]
    pub tail: SeriesTail,
}

impl PowerSeries {
    pub fn new(coefficients: Vec<f64>, growth_bound: f64, declared_rank: Option<u32>) -> Result<Self> {
        Self::with_tail(coefficients, growth_bound, declared_rank, SeriesTail::Zero)
    }

    pub fn with_tail(
        coefficients: Vec<f64>,
        growth_bound: f64,
        declared_rank: Option<u32>,
        tail: SeriesTail,
    ) -> Result<Self> {
        let s = Self { coefficients, growth_bound, declared_rank, tail };
        s.validate()?;
        Ok(s)
    }

    /// Polynomial with the tightest admissible growth bound.
    pub fn polynomial(coefficients: Vec<f64>) -> Result<Self> {
        let c = coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * ln_factorial(k as u64).exp())
            .fold(0.0, f64::max);
        Self::new(coefficients, c.max(f64::MIN_POSITIVE), None)
    }

    pub fn identity() -> Self {
        Self::polynomial(vec![0.0, 1.0]).expect("identity is valid")
    }

    /// Probabilists' Hermite polynomial He_n in monomial form.
    pub fn hermite(n: usize) -> Self {
        let mut a = vec![1.0];
        let mut b = vec![0.0, 1.0];
        if n == 0 {
            return Self::polynomial(a).expect("valid").with_rank(None);
        }
        for k in 1..n {
            let mut c = vec![0.0; k + 2];
            for (i, &v) in b.iter().enumerate() {
                c[i + 1] += v;
            }
            for (i, &v) in a.iter().enumerate() {
                c[i] -= k as f64 * v;
            }
            a = b;
            b = c;
        }
        Self::polynomial(b).expect("valid")
    }

    pub fn with_rank(mut self, rank: Option<u32>) -> Self {
        self.declared_rank = rank;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.growth_bound > 0.0) || self.growth_bound.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "growth bound {} must be positive",
                self.growth_bound
            )));
        }
        if self.coefficients.is_empty() {
            return Err(Error::InvalidParameter("empty coefficient list".into()));
        }
        for (k, &c) in self.coefficients.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::InvalidParameter(format!("c_{k} is not finite")));
            }
            let bound = self.growth_bound / ln_factorial(k as u64).exp();
            if c.abs() > bound * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "|c_{k}| = {} exceeds C/k! = {bound}",
                    c.abs()
                )));
            }
        }
        if self.declared_rank == Some(0) {
            return Err(Error::InvalidParameter("declared rank must be >= 1".into()));
        }
        Ok(())
    }

    /// Index of the last nonzero coefficient (0 for the zero series).
    pub fn degree(&self) -> usize {
        self.coefficients.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// aF + bG, coefficientwise.
    pub fn combine(a: f64, f: &Self, b: f64, g: &Self) -> Result<Self> {
        let n = f.coefficients.len().max(g.coefficients.len());
        let coef = (0..n)
            .map(|k| {
                a * f.coefficients.get(k).copied().unwrap_or(0.0)
                    + b * g.coefficients.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        let tail = if f.tail == SeriesTail::Bounded || g.tail == SeriesTail::Bounded {
            SeriesTail::Bounded
        } else {
            SeriesTail::Zero
        };
        Self::with_tail(
            coef,
            a.abs() * f.growth_bound + b.abs() * g.growth_bound,
            None,
            tail,
        )
    }

    /// C Σ_{k>N} B^k/k! beyond the stored coefficients (zero for polynomials).
    pub fn remainder_bound(&self, moment_bound: f64) -> f64 {
        match self.tail {
            SeriesTail::Zero => 0.0,
            SeriesTail::Bounded => {
                let n = self.coefficients.len();
                let mut sum = 0.0;
                let mut k = n;
                loop {
                    let term = (k as f64 * moment_bound.ln() - ln_factorial(k as u64)).exp();
                    let term = if moment_bound == 0.0 { 0.0 } else { term };
                    sum += term;
                    if (k as f64) > 2.0 * moment_bound && term <= sum * 1e-17 {
                        break;
                    }
                    if k > n + 100_000 {
                        break;
                    }
                    k += 1;
                }
                self.growth_bound * sum
            }
        }
    }
}

/// Smallest M with Σ_{k>M} |c_k| B^k (plus the analytic remainder) below tol.
pub fn truncation_order(series: &PowerSeries, moment_bound: f64, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol = {tol} must be positive")));
    }
    if !(moment_bound >= 0.0) || !moment_bound.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "moment bound {moment_bound} must be finite and non-negative"
        )));
    }
    if !series.growth_bound.is_finite() {
        return Err(Error::NoFiniteOrder("growth bound is not finite".into()));
    }
    let rem = series.remainder_bound(moment_bound);
    if !rem.is_finite() {
        return Err(Error::NoFiniteOrder("tail majorant diverges".into()));
    }
    let n = series.coefficients.len();
    // tails[M] = Σ_{M<k<n} |c_k| B^k, accumulated from the top for stability.
    let mut tails = vec![0.0; n];
    let mut acc = 0.0;
    for m in (0..n).rev() {
        tails[m] = acc;
        let c = series.coefficients[m].abs();
        if c != 0.0 {
            acc += c * moment_bound.powi(m as i32);
        }
    }
    for (m, t) in tails.iter().enumerate() {
        if t + rem < tol {
            return Ok(m);
        }
    }
    Err(Error::NoFiniteOrder(format!(
        "tol = {tol} below the irreducible remainder {rem:.3e} beyond the stored coefficients"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_series(n: usize) -> PowerSeries {
        let c = (0..=n).map(|k| (-ln_factorial(k as u64)).exp()).collect();
        PowerSeries::with_tail(c, 1.0, None, SeriesTail::Bounded).unwrap()
    }

    #[test]
    fn rejects_coefficients_above_growth_bound() {
        assert!(PowerSeries::new(vec![0.0, 0.0, 1.0], 1.0, None).is_err());
        assert!(PowerSeries::new(vec![0.0, 0.0, 0.5], 1.0, None).is_ok());
    }

    #[test]
    fn hermite_monomials() {
        assert_eq!(PowerSeries::hermite(2).coefficients, vec![-1.0, 0.0, 1.0]);
        assert_eq!(PowerSeries::hermite(3).coefficients, vec![0.0, -3.0, 0.0, 1.0]);
        assert_eq!(
            PowerSeries::hermite(4).coefficients,
            vec![3.0, 0.0, -6.0, 0.0, 1.0]
        );
    }

    #[test]
    fn polynomial_order_is_degree() {
        let s = PowerSeries::polynomial(vec![0.5, 1.0, 0.25, 0.1]).unwrap();
        for tol in [1e-3, 1e-9, 1e-15] {
            assert_eq!(truncation_order(&s, 1.0, tol).unwrap(), 3);
        }
    }

    #[test]
    fn exponential_series_matches_direct_tail() {
        let s = exp_series(30);
        let m = truncation_order(&s, 1.0, 1e-6).unwrap();
        let tail = |m: usize| (m + 1..200).map(|k| (-ln_factorial(k as u64)).exp()).sum::<f64>();
        assert!(tail(m) < 1e-6);
        assert!(tail(m - 1) >= 1e-6);
        assert_eq!(m, 9);
        assert_eq!(truncation_order(&s, 1.0, f64::INFINITY).unwrap(), 0);
    }

    #[test]
    fn remainder_blocks_tiny_tolerance() {
        let s = exp_series(5);
        assert!(matches!(
            truncation_order(&s, 1.0, 1e-12),
            Err(Error::NoFiniteOrder(_))
        ));
    }

    #[test]
    fn combine_is_coefficientwise() {
        let f = PowerSeries::hermite(2);
        let g = PowerSeries::identity();
        let h = PowerSeries::combine(2.0, &f, -1.0, &g).unwrap();
        assert_eq!(h.coefficients, vec![-2.0, -1.0, 2.0]);
    }
}
