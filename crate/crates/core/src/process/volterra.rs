//! Young quadrature of moving averages y_t = ∫_{t−L}^t x(t−s) dZ_s.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::fgn::fgn_autocov;
use crate::error::{Error, Result};

/// Left-point weights on fine increments: y = Σ_{i=1}^{len} W_i ΔZ_{J−i}, stored at W[i−1].
///
/// With `richardson` the weights combine step h and 2h sums as 2y_h − y_{2h}.
pub fn volterra_weights(x: impl Fn(f64) -> f64, h: f64, len: usize, richardson: bool) -> Vec<f64> {
    (1..=len)
        .map(|i| {
            let plain = x(i as f64 * h);
            if richardson {
                2.0 * plain - x((2 * i.div_ceil(2)) as f64 * h)
            } else {
                plain
            }
        })
        .collect()
}

/// Sample y at fine indices start, start + stride, … (count values) from increments dz.
///
/// Requires start ≥ weights.len() so every sum sees a full history window.
pub fn convolve_at(weights: &[f64], dz: &[f64], start: usize, stride: usize, count: usize) -> Result<Vec<f64>> {
    let last = start + stride * (count.saturating_sub(1));
    if start < weights.len() || last > dz.len() {
        return Err(Error::InvalidParameter(format!(
            "increment record of length {} cannot support outputs {start}..={last} with history {}",
            dz.len(),
            weights.len()
        )));
    }
    let k = weights.len();
    let n = dz.len();
    if (k as f64) * (count as f64) < 4.0 * (n as f64) * (n as f64).log2().max(1.0) {
        return Ok((0..count)
            .map(|c| {
                let j = start + c * stride;
                weights.iter().enumerate().map(|(i, w)| w * dz[j - 1 - i]).sum()
            })
            .collect());
    }
    // conv[j] = Σ_i W[i] dz[j-1-i]  → kernel g[i+1] = W[i].
    let len = (n + k + 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut a: Vec<Complex<f64>> = (0..len)
        .map(|i| Complex::new(if i < n { dz[i] } else { 0.0 }, 0.0))
        .collect();
    let mut b = vec![Complex::new(0.0, 0.0); len];
    for (i, w) in weights.iter().enumerate() {
        b[i + 1].re = *w;
    }
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= *y;
    }
    inv.process(&mut a);
    let norm = 1.0 / len as f64;
    Ok((0..count).map(|c| a[start + c * stride].re * norm).collect())
}

/// Hermite–OU recursion on coarse steps of r fine increments each, starting from `y_start`.
///
/// Returns y at every coarse time, including the start (length dz.len()/r + 1).
pub fn hou_from_increments(
    lambda: f64,
    sigma: f64,
    y_start: f64,
    dz: &[f64],
    h: f64,
    r: usize,
    richardson: bool,
) -> Result<Vec<f64>> {
    if r == 0 || dz.len() % r != 0 {
        return Err(Error::InvalidParameter(format!(
            "{} increments do not split into steps of {r}",
            dz.len()
        )));
    }
    if richardson && r % 2 != 0 {
        return Err(Error::InvalidParameter("Richardson needs an even refinement".into()));
    }
    let step = h * r as f64;
    let decay = (-lambda * step).exp();
    let w: Vec<f64> = (0..r)
        .map(|i| {
            let plain = (-lambda * (step - i as f64 * h)).exp();
            if richardson {
                2.0 * plain - (-lambda * (step - (2 * (i / 2)) as f64 * h)).exp()
            } else {
                plain
            }
        })
        .collect();
    let mut out = Vec::with_capacity(dz.len() / r + 1);
    let mut y = y_start;
    out.push(y);
    for chunk in dz.chunks(r) {
        let inc: f64 = chunk.iter().zip(&w).map(|(a, b)| a * b).sum();
        y = decay * y + sigma * inc;
        out.push(y);
    }
    Ok(out)
}

/// Exact variance of Σ W_i ΔZ_i when ΔZ are fBm increments of step h (any Hermite rank).
pub fn weights_variance(weights: &[f64], hurst: f64, h: f64) -> f64 {
    let n = weights.len();
    if n == 0 {
        return 0.0;
    }
    let len = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex<f64>> = (0..len)
        .map(|i| Complex::new(if i < n { weights[i] } else { 0.0 }, 0.0))
        .collect();
    planner.plan_fft_forward(len).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let mut v = buf[0].re / len as f64;
    for k in 1..n {
        v += 2.0 * buf[k].re / len as f64 * fgn_autocov(hurst, k);
    }
    v * h.powf(2.0 * hurst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_and_direct_convolution_agree() {
        let w: Vec<f64> = (0..50).map(|i| (-(i as f64) * 0.1).exp()).collect();
        let dz: Vec<f64> = (0..400).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.1).collect();
        let a = convolve_at(&w, &dz, 50, 7, 40).unwrap();
        let direct: Vec<f64> = (0..40)
            .map(|c| {
                let j = 50 + 7 * c;
                (0..50).map(|i| w[i] * dz[j - 1 - i]).sum()
            })
            .collect();
        for (x, y) in a.iter().zip(&direct) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn relaxation_without_noise() {
        let y = hou_from_increments(2.0, 1.0, 3.0, &[0.0; 8], 0.05, 2, true).unwrap();
        for n in 0..y.len() {
            assert!((y[n] - 3.0 * (-2.0 * 0.1 * n as f64).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn weights_variance_white_noise_limit() {
        // H close to 1/2 is not allowed elsewhere, but the formula itself is generic.
        let v = weights_variance(&[1.0, 2.0, 3.0], 0.5, 0.25);
        assert!((v - 14.0 * 0.25).abs() < 1e-12);
    }
}
