//! Seeded parameter sampling, Monte Carlo batches, the satiation sweep
//! and box-plot statistics.

mod monte_carlo;
mod sampling;
mod stats;
mod sweep;

pub use monte_carlo::{
    run_monte_carlo, sample_trial, trial_seed, Cell, CellResult, ExperimentError, ExperimentFamily,
    ExperimentSpec, MonteCarloOutput, Thresholds, TrialRecord, QUARTILE_CONVENTION,
};
pub use sampling::{sample_production, sample_pwl_params, sample_quadratic_params};
pub use stats::{box_stats, BoxStats, StatsError};
pub use sweep::{m4_grid, run_m4_sweep, write_sweep_csv, SweepError, SweepRow, SWEEP_AGENT};
