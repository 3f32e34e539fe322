//! Wiener-chaos contraction calculus, Hermite and Volterra path simulation,
//! limit-theorem diagnostics and slow/fast homogenization.

pub mod chaos;
pub mod error;
pub mod functional;
pub mod homogenization;
pub mod process;
pub mod reference;
pub mod rng;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
