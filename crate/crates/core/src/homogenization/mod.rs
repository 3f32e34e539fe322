//! Slow/fast homogenization: rough and Young solvers, limit equations and weak comparison.

pub mod driver;
pub mod experiment;
pub mod field;
pub mod limit;
pub mod solver;
pub mod weak;

pub use driver::{lift_symmetric, RoughDriver, DEFAULT_GAMMA};
pub use experiment::{run_homogenization, HomogenizationOutcome, HomogenizationSpec};
pub use field::VectorField;
pub use limit::{simulate_limit_sde, LimitSampler, LimitType};
pub use solver::{solve_rough, solve_rough_path, solve_rough_tol, solve_young, solve_young_tol, DEFAULT_SOLVER_TOL};
pub use weak::{weak_distance, WeakReport};
