use std::io::Write;

use serde::Serialize;

use crate::model::{MarketInstance, UtilityParams};
use crate::solver::{solve, MethodChoice, SolveError, SolverConfig};

/// Index of the swept agent (the fourth).
pub const SWEEP_AGENT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub m4: f64,
    pub lambda_star: f64,
    pub x4: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SweepError {
    #[error("sweep needs a quadratic fourth agent")]
    BadBase,
    #[error("m4={m4}: {source}")]
    Solve { m4: f64, source: SolveError },
}

/// `5, 6, ..., 30`.
pub fn m4_grid() -> Vec<f64> {
    (5..=30).map(f64::from).collect()
}

/// Re-solve `base` with the fourth agent's satiation load set to each value,
/// everything else held fixed.
pub fn run_m4_sweep(base: &MarketInstance, m4_values: &[f64]) -> Result<Vec<SweepRow>, SweepError> {
    let b4 = match base.preferences.get(SWEEP_AGENT) {
        Some(UtilityParams::Quadratic { b, .. }) => *b,
        _ => return Err(SweepError::BadBase),
    };
    let cfg = SolverConfig::default();
    m4_values
        .iter()
        .map(|&m4| {
            let mut inst = base.clone();
            inst.preferences[SWEEP_AGENT] = UtilityParams::quadratic(b4, m4);
            let r = solve(&inst, &cfg, MethodChoice::Auto).map_err(|source| SweepError::Solve { m4, source })?;
            Ok(SweepRow { m4, lambda_star: r.lambda_star, x4: r.x_star[SWEEP_AGENT] })
        })
        .collect()
}

/// CSV with columns `m4,lambda_star,x4`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
