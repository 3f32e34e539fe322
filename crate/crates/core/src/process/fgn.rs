//! Fractional Gaussian noise by circulant embedding.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::rng::{fill_normal, Rng};

/// Autocovariance of unit-step fractional Gaussian noise at lag k.
pub fn fgn_autocov(h: f64, k: usize) -> f64 {
    let k = k as f64;
    let e = 2.0 * h;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

/// Exact sampler of n consecutive unit-step fGn values.
pub struct FgnGenerator {
    n: usize,
    h: f64,
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FgnGenerator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FgnGenerator").field("n", &self.n).field("h", &self.h).finish()
    }
}

impl FgnGenerator {
    pub fn new(h: f64, n: usize) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::InvalidParameter(format!("H = {h} outside (0,1)")));
        }
        if n < 1 {
            return Err(Error::InvalidParameter("fGn length must be >= 1".into()));
        }
        let m = 2 * n;
        let mut row: Vec<Complex<f64>> = (0..m)
            .map(|j| {
                let lag = if j <= n { j } else { m - j };
                Complex::new(fgn_autocov(h, lag), 0.0)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);
        let top = row.iter().map(|c| c.re.abs()).fold(0.0, f64::max);
        let mut scale = Vec::with_capacity(m);
        for c in &row {
            if c.re < -1e-10 * top {
                return Err(Error::Numerical(format!(
                    "circulant embedding not positive semidefinite (eigenvalue {:.3e})",
                    c.re
                )));
            }
            scale.push((c.re.max(0.0) / m as f64).sqrt());
        }
        Ok(Self { n, h, scale, fft })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn hurst(&self) -> f64 {
        self.h
    }

    /// Number of standard normals consumed per draw.
    pub fn noise_len(&self) -> usize {
        4 * self.n
    }

    /// Two independent unit-step fGn sequences from one transform.
    pub fn from_noise_pair(&self, xi: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let m = 2 * self.n;
        debug_assert_eq!(xi.len(), 2 * m);
        let mut buf: Vec<Complex<f64>> = (0..m)
            .map(|k| Complex::new(xi[2 * k], xi[2 * k + 1]) * self.scale[k])
            .collect();
        self.fft.process(&mut buf);
        let a = buf[..self.n].iter().map(|c| c.re).collect();
        let b = buf[..self.n].iter().map(|c| c.im).collect();
        (a, b)
    }

    pub fn from_noise(&self, xi: &[f64]) -> Vec<f64> {
        self.from_noise_pair(xi).0
    }

    pub fn sample_pair(&self, rng: &mut Rng) -> (Vec<f64>, Vec<f64>) {
        let mut xi = vec![0.0; self.noise_len()];
        fill_normal(rng, &mut xi);
        self.from_noise_pair(&xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn autocov_lag_zero_is_one() {
        assert!((fgn_autocov(0.7, 0) - 1.0).abs() < 1e-15);
        assert!((fgn_autocov(0.5, 3)).abs() < 1e-12);
    }

    #[test]
    fn empirical_lag_one_correlation() {
        let g = FgnGenerator::new(0.8, 256).unwrap();
        let mut rng = stream_rng(11, 0);
        let (mut s0, mut s1, mut cnt) = (0.0, 0.0, 0.0);
        for _ in 0..200 {
            let (a, b) = g.sample_pair(&mut rng);
            for x in [a, b] {
                for i in 0..x.len() - 1 {
                    s0 += x[i] * x[i];
                    s1 += x[i] * x[i + 1];
                    cnt += 1.0;
                }
            }
        }
        let rho = s1 / s0;
        assert!((rho - fgn_autocov(0.8, 1)).abs() < 0.02, "rho {rho}");
        assert!((s0 / cnt - 1.0).abs() < 0.03);
    }
}
