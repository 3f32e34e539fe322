//! Increment generators shared by the path simulators and the ensemble engine.

use serde::{Deserialize, Serialize};

use super::fgn::FgnGenerator;
use super::hermite::{HermiteSumGenerator, RosenblattGenerator};
use crate::chaos::HurstParams;
use crate::error::{Error, Result};
use crate::rng::{fill_normal, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HermiteBackend {
    /// Off-diagonal Wiener sum of the rank-2 kernel (m = 2 only).
    #[default]
    Quadrature,
    /// Normalized partial sums of He_m of long-memory Gaussian noise (any m).
    HermiteSum,
}

/// Deterministic map from a standard Gaussian vector to one or more increment paths.
pub trait IncrementSource: Send + Sync {
    /// Number of increments per path.
    fn steps(&self) -> usize;
    fn noise_len(&self) -> usize;
    /// Independent paths produced per noise vector.
    fn paths_per_noise(&self) -> usize {
        1
    }
    fn increments_from_noise(&self, xi: &[f64]) -> Vec<Vec<f64>>;
    fn method(&self) -> String;

    fn sample(&self, rng: &mut Rng) -> Vec<Vec<f64>> {
        let mut xi = vec![0.0; self.noise_len()];
        fill_normal(rng, &mut xi);
        self.increments_from_noise(&xi)
    }
}

/// Increments of fBm with step h.
pub struct FbmIncrements {
    gen: FgnGenerator,
    scale: f64,
}

impl FbmIncrements {
    pub fn new(h: f64, n: usize, step: f64) -> Result<Self> {
        Ok(Self { gen: FgnGenerator::new(h, n)?, scale: step.powf(h) })
    }
}

impl IncrementSource for FbmIncrements {
    fn steps(&self) -> usize {
        self.gen.len()
    }
    fn noise_len(&self) -> usize {
        self.gen.noise_len()
    }
    fn paths_per_noise(&self) -> usize {
        2
    }
    fn increments_from_noise(&self, xi: &[f64]) -> Vec<Vec<f64>> {
        let (mut a, mut b) = self.gen.from_noise_pair(xi);
        a.iter_mut().chain(b.iter_mut()).for_each(|v| *v *= self.scale);
        vec![a, b]
    }
    fn method(&self) -> String {
        "fbm-circulant".into()
    }
}

/// Build the increment source for a rank-m Hermite driver with n steps of size `step`.
pub fn hermite_source(
    params: &HurstParams,
    n: usize,
    step: f64,
    backend: HermiteBackend,
    far_history: Option<f64>,
) -> Result<Box<dyn IncrementSource>> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("step {step} must be positive")));
    }
    if params.m == 1 {
        return Ok(Box::new(FbmIncrements::new(params.h, n, step)?));
    }
    let horizon = n as f64 * step;
    match backend {
        HermiteBackend::Quadrature => {
            if params.m != 2 {
                return Err(Error::Unsupported(format!(
                    "quadrature backend supports m <= 2 (cost grows like N^m), got m = {}",
                    params.m
                )));
            }
            Ok(Box::new(RosenblattGenerator::new(params, n, horizon, far_history)?))
        }
        HermiteBackend::HermiteSum => Ok(Box::new(HermiteSumGenerator::new(params, n, horizon)?)),
    }
}
