//! Terminal-marginal comparison of two samples.

use serde::{Deserialize, Serialize};

use crate::stats::{bootstrap_se, ks_critical, ks_two_sample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakReport {
    pub ks_distance: f64,
    /// Two-sample KS critical value at 5%.
    pub ks_critical: f64,
    /// E_A[X^k] − E_B[X^k] for k = 1..4.
    pub moment_gaps: [f64; 4],
    pub moment_stderr: [f64; 4],
    pub n_a: usize,
    pub n_b: usize,
}

impl WeakReport {
    pub fn ks_pass(&self) -> bool {
        self.ks_distance < self.ks_critical
    }
}

pub fn weak_distance(a: &[f64], b: &[f64]) -> WeakReport {
    let mut gaps = [0.0; 4];
    let mut se = [0.0; 4];
    for k in 0..4 {
        let p = k as i32 + 1;
        let m = move |x: &[f64]| x.iter().map(|v| v.powi(p)).sum::<f64>() / x.len() as f64;
        gaps[k] = m(a) - m(b);
        se[k] = (bootstrap_se(a, m).powi(2) + bootstrap_se(b, m).powi(2)).sqrt();
    }
    WeakReport {
        ks_distance: ks_two_sample(a, b),
        ks_critical: ks_critical(a.len(), b.len(), 0.05),
        moment_gaps: gaps,
        moment_stderr: se,
        n_a: a.len(),
        n_b: b.len(),
    }
}
