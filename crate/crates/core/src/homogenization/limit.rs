//! Reference solutions of the limiting Young (Hermite driver) or Stratonovich (Wiener driver) equation.

use serde::{Deserialize, Serialize};

use super::driver::lift_symmetric;
use super::field::VectorField;
use super::solver::{solve_rough, solve_young};
use crate::chaos::{classify_regime, make_params, HurstParams, Regime};
use crate::error::{Error, Result};
use crate::process::{cumulative, hermite_source, HermiteBackend, IncrementSource, PathGrid, PathMeta, SimConfig};
use crate::rng::{normals, stream_rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LimitType {
    /// d x̄ = c f(x̄) dZ^{H*(w), w} for the generating (H, m).
    YoungHermite { params: HurstParams, w: u32 },
    /// d x̄ = c f(x̄) ∘ dW.
    StratonovichWiener,
}

/// Solves the limit equation on n_steps × dt for any (seed, replica) with one set-up.
pub struct LimitSampler {
    field: VectorField,
    c: f64,
    x0: f64,
    n_steps: usize,
    dt: f64,
    source: Option<Box<dyn IncrementSource>>,
}

impl LimitSampler {
    pub fn new(
        field: &VectorField,
        c: f64,
        x0: f64,
        limit: &LimitType,
        n_steps: usize,
        dt: f64,
        backend: HermiteBackend,
        far_history: Option<f64>,
    ) -> Result<Self> {
        field.validate()?;
        if !c.is_finite() || n_steps < 1 || !(dt > 0.0) {
            return Err(Error::InvalidParameter("limit SDE needs finite c, n_steps >= 1, dt > 0".into()));
        }
        let source = match limit {
            LimitType::StratonovichWiener => None,
            LimitType::YoungHermite { params, w } => {
                let cl = classify_regime(params, *w);
                match cl.regime {
                    Regime::Boundary => {
                        return Err(Error::Boundary("limit equation undefined at H*(w) = 1/2".into()))
                    }
                    Regime::ShortRange => {
                        return Err(Error::InvalidParameter(format!(
                            "H*(w) = {:.4} < 1/2: the limit is a Stratonovich equation",
                            cl.h_star
                        )))
                    }
                    Regime::LongRange => {}
                }
                let driver = make_params(cl.h_star, *w)?;
                Some(hermite_source(&driver, n_steps, dt, backend, far_history)?)
            }
        };
        Ok(Self { field: field.clone(), c, x0, n_steps, dt, source })
    }

    /// Driver path c·Z (or c·W) for one replica.
    pub fn driver(&self, seed: u64, replica: u64) -> Result<PathGrid> {
        let mut rng = stream_rng(seed, replica);
        let (dz, method) = match &self.source {
            Some(src) => (src.sample(&mut rng).swap_remove(0), src.method()),
            None => {
                let sd = self.dt.sqrt();
                (normals(&mut rng, self.n_steps).into_iter().map(|v| v * sd).collect(), "wiener".into())
            }
        };
        let values = cumulative(&dz).into_iter().map(|v| self.c * v).collect();
        let meta = PathMeta { seed, replica, method, ..Default::default() };
        PathGrid::new(0.0, self.dt, values, meta)
    }

    pub fn solve(&self, seed: u64, replica: u64) -> Result<PathGrid> {
        let x = self.driver(seed, replica)?;
        match self.source {
            Some(_) => solve_young(&self.field, &x, self.x0),
            None => solve_rough(&self.field, &lift_symmetric(&x), self.x0),
        }
    }
}

pub fn simulate_limit_sde(f: &VectorField, c: f64, limit: &LimitType, cfg: &SimConfig, x0: f64) -> Result<PathGrid> {
    cfg.validate()?;
    LimitSampler::new(f, c, x0, limit, cfg.n_steps, cfg.dt, cfg.backend, cfg.far_history)?.solve(cfg.seed, cfg.replica)
}
