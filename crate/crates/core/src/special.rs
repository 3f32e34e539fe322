//! Special functions and small combinatorial helpers.

use num_bigint::BigUint;
use num_traits::One;

pub use statrs::function::gamma::{gamma, ln_gamma};

pub fn beta(a: f64, b: f64) -> f64 {
    statrs::function::beta::ln_beta(a, b).exp()
}

pub fn ln_factorial(n: u64) -> f64 {
    statrs::function::factorial::ln_factorial(n)
}

/// Upper incomplete gamma Γ(s, x) (not regularized).
pub fn upper_gamma(s: f64, x: f64) -> f64 {
    statrs::function::gamma::gamma_ur(s, x) * gamma(s)
}

pub fn factorial_big(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

pub fn binomial_big(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

pub fn binomial_f64(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// (n-1)!! style double factorial n!! with 0!! = (-1)!! = 1.
pub fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// Probabilists' Hermite polynomial He_n(x).
pub fn hermite_he(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut a, mut b) = (1.0, x);
            for k in 1..n {
                let c = x * b - k as f64 * a;
                a = b;
                b = c;
            }
            b
        }
    }
}

/// E[Z^k] for standard normal Z.
pub fn gaussian_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        double_factorial(k as i64 - 1)
    }
}

/// Coefficients a_d with G(σZ) = Σ_d a_d He_d(Z), for G(x) = Σ_k c_k x^k.
pub fn hermite_coefficients(c: &[f64], sigma: f64) -> Vec<f64> {
    let n = c.len();
    let mut a = vec![0.0; n];
    for (k, &ck) in c.iter().enumerate() {
        if ck == 0.0 {
            continue;
        }
        let sk = ck * sigma.powi(k as i32);
        let mut p = 0;
        while 2 * p <= k {
            let d = k - 2 * p;
            // k! / (2^p p! d!)
            let w = (ln_factorial(k as u64)
                - p as f64 * std::f64::consts::LN_2
                - ln_factorial(p as u64)
                - ln_factorial(d as u64))
            .exp();
            a[d] += sk * w;
            p += 1;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_recurrence_matches_closed_forms() {
        let x = 0.37;
        assert!((hermite_he(2, x) - (x * x - 1.0)).abs() < 1e-15);
        assert!((hermite_he(3, x) - (x.powi(3) - 3.0 * x)).abs() < 1e-15);
        assert!((hermite_he(4, x) - (x.powi(4) - 6.0 * x * x + 3.0)).abs() < 1e-14);
    }

    #[test]
    fn hermite_coefficients_of_cube() {
        let a = hermite_coefficients(&[0.0, 0.0, 0.0, 1.0], 1.0);
        assert!((a[1] - 3.0).abs() < 1e-12);
        assert!((a[3] - 1.0).abs() < 1e-12);
        assert_eq!(a[0], 0.0);
        assert_eq!(a[2], 0.0);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial_big(10, 3), BigUint::from(120u32));
        assert_eq!(binomial_big(3, 5), BigUint::ZERO);
        assert_eq!(binomial_f64(6, 3), 20.0);
    }

    #[test]
    fn beta_via_gamma_identity() {
        let (a, b) = (0.2, 0.6);
        let direct = gamma(a) * gamma(b) / gamma(a + b);
        assert!((beta(a, b) / direct - 1.0).abs() < 1e-12);
    }
}
