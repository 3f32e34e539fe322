//! Normalized functionals of stationary moving averages and their limit diagnostics.

pub mod diagnostics;
pub mod engine;
pub mod estimators;
pub mod sample;
pub mod series;

pub use diagnostics::{
    cross_independence, gaussianity_report, holder_seminorm, DiagnosticsReport, Estimate,
};
pub use engine::{replica_map, units_for, Model, SimSettings, StationarySampler};
pub use estimators::{
    default_eps_ladder, eps_seed, kappa_estimate, kappa_from_terminal, limit_covariance_srd,
    predicted_slope, scaling_exponent, scaling_fit, KappaEstimate, LambdaEstimate, ScalingEstimate,
};
pub use sample::{functional_samples, interpolant_integrals, normalized_functional, FunctionalSample};
pub use series::{evaluate_series, stationary_moments, Centering, CenteringOptions, SeriesEvaluator};
