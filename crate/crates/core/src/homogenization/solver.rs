//! Euler–Young and Davie schemes with step-halving error estimates.

use super::driver::{lift_symmetric, RoughDriver};
use super::field::VectorField;
use crate::error::{Error, Result};
use crate::process::PathGrid;

/// Relative step-halving discrepancy tolerated by default.
pub const DEFAULT_SOLVER_TOL: f64 = 5e-2;

fn euler(f: &VectorField, x: &[f64], stride: usize, x0: f64) -> Vec<f64> {
    let mut out = vec![x0];
    let mut s = x0;
    let mut i = 0;
    while i + stride < x.len() {
        s += f.eval(s) * (x[i + stride] - x[i]);
        out.push(s);
        i += stride;
    }
    out
}

fn davie(f: &VectorField, driver: &RoughDriver, stride: usize, x0: f64) -> Vec<f64> {
    let mut out = vec![x0];
    let mut s = x0;
    let mut i = 0;
    while i + stride < driver.path.len() {
        let (v, d, _) = f.jet(s);
        s += v * driver.increment(i, i + stride) + d * v * driver.lift(i, i + stride);
        out.push(s);
        i += stride;
    }
    out
}

/// max_k |fine(2k) − coarse(k)| relative to 1 + max|fine|.
fn halving_discrepancy(fine: &[f64], coarse: &[f64]) -> f64 {
    let scale = 1.0 + fine.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    coarse
        .iter()
        .enumerate()
        .map(|(k, c)| (fine[2 * k] - c).abs())
        .fold(0.0, f64::max)
        / scale
}

fn finish(x: &PathGrid, values: Vec<f64>, disc: Option<f64>, tol: f64, method: &str) -> Result<PathGrid> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("{method} solution blew up")));
    }
    if let Some(d) = disc {
        if d > tol {
            return Err(Error::Tolerance(format!(
                "{method}: step-halving discrepancy {d:.3e} above tolerance {tol:.3e}; refine the driver grid"
            )));
        }
    }
    let mut meta = x.meta.clone();
    meta.method = format!("{method} driven by {}", x.meta.method);
    meta.error_estimate = disc;
    PathGrid::new(x.t0, x.dt, values, meta)
}

pub fn solve_young(f: &VectorField, x: &PathGrid, x0: f64) -> Result<PathGrid> {
    solve_young_tol(f, x, x0, DEFAULT_SOLVER_TOL)
}

/// Euler–Young x_{n+1} = x_n + f(x_n) X_{t_n,t_{n+1}}.
pub fn solve_young_tol(f: &VectorField, x: &PathGrid, x0: f64, tol: f64) -> Result<PathGrid> {
    f.validate()?;
    let fine = euler(f, &x.values, 1, x0);
    let disc = (x.len() >= 3).then(|| halving_discrepancy(&fine, &euler(f, &x.values, 2, x0)));
    finish(x, fine, disc, tol, "euler-young")
}

pub fn solve_rough(f: &VectorField, driver: &RoughDriver, x0: f64) -> Result<PathGrid> {
    solve_rough_tol(f, driver, x0, DEFAULT_SOLVER_TOL)
}

/// Davie x_{n+1} = x_n + f X_{t_n,t_{n+1}} + f′f 𝕏_{t_n,t_{n+1}} with the symmetric lift.
pub fn solve_rough_tol(f: &VectorField, driver: &RoughDriver, x0: f64, tol: f64) -> Result<PathGrid> {
    f.validate()?;
    if !(driver.gamma > 1.0 / 3.0) {
        return Err(Error::InvalidParameter(format!(
            "Davie scheme needs gamma > 1/3, driver asserts {}",
            driver.gamma
        )));
    }
    let x = &driver.path;
    let fine = davie(f, driver, 1, x0);
    let disc = (x.len() >= 3).then(|| halving_discrepancy(&fine, &davie(f, driver, 2, x0)));
    finish(x, fine, disc, tol, "davie")
}

/// Rough solve of a plain path through its symmetric lift.
pub fn solve_rough_path(f: &VectorField, x: &PathGrid, x0: f64) -> Result<PathGrid> {
    solve_rough(f, &lift_symmetric(x), x0)
}
