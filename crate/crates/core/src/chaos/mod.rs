//! Contraction combinatorics, regime classification and series truncation.

pub mod bounds;
pub mod contraction;
pub mod graph;
pub mod params;
pub mod rank;
pub mod series;

pub use bounds::{c4_bound, c4_bound_log, frak_l};
pub use contraction::{
    c1_constant, chaos_projection_profile, chaos_projection_profile_with_ceiling,
    enumerate_contractions, enumerate_contractions_with_ceiling, ContractionVector,
    DEFAULT_CEILING,
};
pub use graph::{enumerate_graphs, ContractionGraph};
pub use params::{
    classify_regime, h_star, make_params, scaling_alpha, HurstParams, Regime,
    RegimeClassification, BOUNDARY_TOL,
};
pub use rank::{chaos_rank, chaos_rank_with, RankEstimate, RankMethod, RankOptions};
pub use series::{truncation_order, PowerSeries, SeriesTail};
