//! Descriptive statistics, regression, KS distances and resampling errors.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::stream_rng;

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() as f64 - 1.0)
}

pub fn covariance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() as f64 - 1.0)
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    covariance(a, b) / (variance(a) * variance(b)).sqrt()
}

fn central_moments(x: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let m = mean(x);
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - m;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (m, m2 / n, m3 / n, m4 / n)
}

pub fn skewness(x: &[f64]) -> f64 {
    let (_, m2, m3, _) = central_moments(x);
    m3 / m2.powf(1.5)
}

pub fn excess_kurtosis(x: &[f64]) -> f64 {
    let (_, m2, _, m4) = central_moments(x);
    m4 / (m2 * m2) - 3.0
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn sorted(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Linear-interpolated quantile of sorted data.
pub fn quantile_sorted(s: &[f64], p: f64) -> f64 {
    let pos = p.clamp(0.0, 1.0) * (s.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < s.len() {
        s[i] * (1.0 - f) + s[i + 1] * f
    } else {
        s[i]
    }
}

/// sup |F_n − Φ((x−μ)/σ)|.
pub fn ks_normal(x: &[f64], mu: f64, sigma: f64) -> f64 {
    let s = sorted(x);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, v)| {
            let f = normal_cdf((v - mu) / sigma);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (sa, sb) = (sorted(a), sorted(b));
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < sa.len() && j < sb.len() {
        let v = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= v {
            i += 1;
        }
        while j < sb.len() && sb[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Large-sample two-sample KS critical value at level alpha.
pub fn ks_critical(na: usize, nb: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    c * ((na + nb) as f64 / (na as f64 * nb as f64)).sqrt()
}

/// Lilliefors critical value for KS against a fitted normal (large-n asymptotics).
pub fn lilliefors_critical(n: usize, alpha: f64) -> f64 {
    let c = if alpha <= 0.01 {
        1.031
    } else if alpha <= 0.05 {
        0.886
    } else if alpha <= 0.10 {
        0.805
    } else {
        0.768
    };
    c / (n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub r2: f64,
}

pub fn ols(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let slope_se = if n > 2.0 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    LinearFit { slope, intercept, slope_se, r2: if syy > 0.0 { 1.0 - rss / syy } else { 1.0 } }
}

pub const BOOTSTRAP_RESAMPLES: usize = 200;
const BOOTSTRAP_SEED: u64 = 0x5eed_b007;

/// Bootstrap standard error of a statistic. Data are put in canonical (sorted)
/// order first so the result does not depend on the input ordering.
pub fn bootstrap_se(x: &[f64], stat: impl Fn(&[f64]) -> f64) -> f64 {
    let s = sorted(x);
    let n = s.len();
    let mut rng = stream_rng(BOOTSTRAP_SEED, n as u64);
    let mut buf = vec![0.0; n];
    let vals: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            for v in buf.iter_mut() {
                *v = s[rng.random_range(0..n)];
            }
            stat(&buf)
        })
        .collect();
    variance(&vals).sqrt()
}

/// Bootstrap standard error of a statistic of paired data, in canonical order.
pub fn bootstrap_se_pairs(a: &[f64], b: &[f64], stat: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
    let mut pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    let n = pairs.len();
    let mut rng = stream_rng(BOOTSTRAP_SEED ^ 1, n as u64);
    let (mut ba, mut bb) = (vec![0.0; n], vec![0.0; n]);
    let vals: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            for i in 0..n {
                let p = pairs[rng.random_range(0..n)];
                ba[i] = p.0;
                bb[i] = p.1;
            }
            stat(&ba, &bb)
        })
        .collect();
    variance(&vals).sqrt()
}

/// Delete-a-group jackknife over contiguous groups of replicas.
///
/// `estimate(range)` must return the statistic computed without the replicas in `range`.
pub fn group_jackknife_se(n: usize, groups: usize, estimate: impl Fn(std::ops::Range<usize>) -> f64) -> f64 {
    let g = groups.min(n).max(2);
    let vals: Vec<f64> = (0..g).map(|k| estimate(k * n / g..(k + 1) * n / g)).collect();
    let m = mean(&vals);
    ((g as f64 - 1.0) / g as f64 * vals.iter().map(|v| (v - m).powi(2)).sum::<f64>()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::normals;

    #[test]
    fn moments_of_known_data() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&x), 2.5);
        assert!((variance(&x) - 5.0 / 3.0).abs() < 1e-15);
        assert!(skewness(&x).abs() < 1e-15);
        assert!((excess_kurtosis(&x) - (-1.36)).abs() < 1e-12);
    }

    #[test]
    fn ols_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = ols(&x, &y);
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept - 1.0).abs() < 1e-14);
        assert!(f.slope_se < 1e-7);
    }

    #[test]
    fn ks_identical_samples_zero() {
        let x = normals(&mut stream_rng(1, 0), 500);
        assert_eq!(ks_two_sample(&x, &x), 0.0);
    }

    #[test]
    fn ks_normal_calibration() {
        let x = normals(&mut stream_rng(2, 0), 4000);
        assert!(ks_normal(&x, 0.0, 1.0) < lilliefors_critical(4000, 0.01));
    }

    #[test]
    fn bootstrap_ignores_order() {
        let x = normals(&mut stream_rng(3, 0), 300);
        let mut y = x.clone();
        y.reverse();
        assert_eq!(bootstrap_se(&x, skewness), bootstrap_se(&y, skewness));
    }

    #[test]
    fn critical_value_formula() {
        let c = ks_critical(1000, 1000, 0.05);
        assert!((c - 1.3581 * (2.0f64 / 1000.0).sqrt()).abs() < 1e-3);
    }
}
