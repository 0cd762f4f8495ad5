//! Competitive-equilibrium pricing for multi-agent transactive energy
//! markets, and checks that bound the clearing price by shaping the
//! agents' preference parameters.
//!
//! * [`model`]: market instances, validation and the JSON file format.
//! * [`solver`]: clearing prices and allocations, with KKT verification.
//! * [`shaping`]: admissible preference boxes and their worst-case price.
//! * [`consensus`]: aggregator and distributed (flooding / averaging) clearing.
//! * [`experiment`]: seeded Monte Carlo batches, sweeps and box-plot statistics.

pub mod consensus;
pub mod experiment;
pub mod model;
pub mod shaping;
pub mod solver;

pub use model::{
    load_instance, parse_instance, save_instance, validate_instance, EquilibriumResult, Family,
    MarketInstance, Method, ModelKind, UtilityParams, ValidationReport, Violation,
};
pub use solver::{
    solve, solve_mtes_generic, solve_mtes_pwl, solve_mtes_quadratic, solve_mtes_st, verify_kkt,
    KktReport, MethodChoice, SolveError, SolverConfig,
};
pub use shaping::{
    check_homogeneous, check_pwl_set, check_quadratic_set, chi_theta_quadratic, BindingCondition,
    ShapingBounds, ShapingError, ShapingQuery, ShapingVerdict,
};
pub use consensus::{run_aggregator, run_distributed, CommGraph, ConsensusConfig, ConsensusMode, ConsensusTrace};
pub use experiment::{box_stats, run_m4_sweep, run_monte_carlo, BoxStats, ExperimentSpec};
