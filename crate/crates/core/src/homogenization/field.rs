//! Vector fields with three bounded derivatives and analytic f′, f″.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorField {
    /// f(x) = a x.
    Linear { a: f64 },
    /// f(x) = A sin x.
    Sine { amplitude: f64 },
    /// f(x) = p(c(x)) with c the identity on [−R, R] and a smooth saturation outside.
    CompactPolynomial { coeffs: Vec<f64>, radius: f64 },
}

/// Saturation g(u) = tanh u + u³e^{−u}/3 for u = |x| − R ≥ 0; matches the identity to third order at 0.
fn sat(u: f64) -> (f64, f64, f64) {
    let t = u.tanh();
    let e = (-u).exp();
    let g = t + u * u * u * e / 3.0;
    let g1 = 1.0 - t * t + (u * u - u * u * u / 3.0) * e;
    let g2 = -2.0 * t * (1.0 - t * t) + (2.0 * u - 2.0 * u * u + u * u * u / 3.0) * e;
    (g, g1, g2)
}

fn clamp(x: f64, r: f64) -> (f64, f64, f64) {
    if x.abs() <= r {
        (x, 1.0, 0.0)
    } else {
        let s = x.signum();
        let (g, g1, g2) = sat(x.abs() - r);
        (s * (r + g), g1, s * g2)
    }
}

fn poly(c: &[f64], x: f64) -> (f64, f64, f64) {
    let (mut p, mut p1, mut p2) = (0.0, 0.0, 0.0);
    for &ck in c.iter().rev() {
        p2 = p2 * x + 2.0 * p1;
        p1 = p1 * x + p;
        p = p * x + ck;
    }
    (p, p1, p2)
}

impl VectorField {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Linear { a } => a.is_finite(),
            Self::Sine { amplitude } => amplitude.is_finite(),
            Self::CompactPolynomial { coeffs, radius } => {
                !coeffs.is_empty() && coeffs.iter().all(|c| c.is_finite()) && *radius > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid vector field {self:?}")))
        }
    }

    /// (f, f′, f″) at x.
    pub fn jet(&self, x: f64) -> (f64, f64, f64) {
        match self {
            Self::Linear { a } => (a * x, *a, 0.0),
            Self::Sine { amplitude } => (amplitude * x.sin(), amplitude * x.cos(), -amplitude * x.sin()),
            Self::CompactPolynomial { coeffs, radius } => {
                let (c, c1, c2) = clamp(x, *radius);
                let (p, p1, p2) = poly(coeffs, c);
                (p, p1 * c1, p2 * c1 * c1 + p1 * c2)
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.jet(x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.jet(x).1
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        self.jet(x).2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let fields = [
            VectorField::Linear { a: 1.5 },
            VectorField::Sine { amplitude: 0.7 },
            VectorField::CompactPolynomial { coeffs: vec![0.2, -1.0, 0.5, 0.3], radius: 1.2 },
        ];
        let h = 1e-5;
        for f in &fields {
            for &x in &[-3.0, -1.3, -0.4, 0.0, 0.9, 1.25, 2.5] {
                let (_, d1, d2) = f.jet(x);
                let fd1 = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
                let fd2 = (f.derivative(x + h) - f.derivative(x - h)) / (2.0 * h);
                assert!((d1 - fd1).abs() < 1e-6, "{f:?} f' at {x}: {d1} vs {fd1}");
                assert!((d2 - fd2).abs() < 1e-5, "{f:?} f'' at {x}: {d2} vs {fd2}");
            }
        }
    }

    #[test]
    fn clamp_is_c2_at_radius() {
        let r = 1.0;
        let (a, a1, a2) = clamp(r + 1e-9, r);
        assert!((a - r).abs() < 1e-8 && (a1 - 1.0).abs() < 1e-8 && a2.abs() < 1e-7);
        // bounded far out
        assert!(clamp(50.0, r).0 < r + 2.0);
    }
}
