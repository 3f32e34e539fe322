//! Level-one path plus its symmetric second level ½(X_{s,t})².

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::PathGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoughDriver {
    pub path: PathGrid,
    /// 𝕏 over consecutive grid steps.
    pub second_level: Vec<f64>,
    /// Asserted Hölder exponent of the path.
    pub gamma: f64,
}

/// Hölder exponent assumed when none is given (Brownian-type drivers).
pub const DEFAULT_GAMMA: f64 = 0.5;

pub fn lift_symmetric(x: &PathGrid) -> RoughDriver {
    RoughDriver {
        path: x.clone(),
        second_level: x.values.windows(2).map(|w| 0.5 * (w[1] - w[0]).powi(2)).collect(),
        gamma: DEFAULT_GAMMA,
    }
}

impl RoughDriver {
    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidParameter(format!("gamma = {gamma} outside (0, 1]")));
        }
        self.gamma = gamma;
        Ok(self)
    }

    /// X_{s,t} between grid indices.
    pub fn increment(&self, s: usize, t: usize) -> f64 {
        self.path.values[t] - self.path.values[s]
    }

    /// 𝕏_{s,t} between grid indices.
    pub fn lift(&self, s: usize, t: usize) -> f64 {
        if t == s + 1 {
            self.second_level[s]
        } else {
            0.5 * self.increment(s, t).powi(2)
        }
    }

    /// max over adjacent triples of |𝕏_{s,u} − 𝕏_{s,t} − 𝕏_{t,u} − X_{s,t}X_{t,u}|.
    pub fn chen_residual(&self) -> f64 {
        (0..self.path.len().saturating_sub(2))
            .map(|s| {
                let (t, u) = (s + 1, s + 2);
                (self.lift(s, u) - self.lift(s, t) - self.lift(t, u) - self.increment(s, t) * self.increment(t, u)).abs()
            })
            .fold(0.0, f64::max)
    }
}
