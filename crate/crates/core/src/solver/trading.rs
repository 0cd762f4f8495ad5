//! Markets with strategic trading.
//!
//! With a positive price the trade constraint `x + e <= a` binds for every
//! agent, and the market reduces to the plain one with `e = a - x`. When the
//! plain market clears at a non-positive price the trading market prices
//! energy at zero instead, agents consume at satiation and the unused
//! supply is written off evenly against the trades.

use super::demand::agent_demand;
use super::{check_valid, clear, finish, Clearing, MethodChoice, SolveError, SolverConfig};
use crate::model::{EquilibriumResult, MarketInstance, UtilityParams};

pub fn solve_mtes_st(
    instance: &MarketInstance,
    cfg: &SolverConfig,
) -> Result<EquilibriumResult, SolveError> {
    solve_mtes_st_with(instance, cfg, MethodChoice::Auto)
}

pub fn solve_mtes_st_with(
    instance: &MarketInstance,
    cfg: &SolverConfig,
    choice: MethodChoice,
) -> Result<EquilibriumResult, SolveError> {
    check_valid(instance)?;
    let clearing = clear_trading(&instance.preferences, instance.capacity(), cfg, choice)?;
    let e = trades(&instance.production, &clearing.x);
    finish(instance, clearing, Some(e), cfg)
}

pub(crate) fn clear_trading(
    prefs: &[UtilityParams],
    capacity: f64,
    cfg: &SolverConfig,
    choice: MethodChoice,
) -> Result<Clearing, SolveError> {
    let plain = clear(prefs, capacity, cfg, choice)?;
    if plain.lambda > 0.0 {
        return Ok(plain);
    }
    if plain.lambda == 0.0 {
        return Ok(Clearing { lambda: 0.0, ..plain });
    }
    // A negative plain price rules out piecewise-linear agents, whose demand
    // is unbounded below zero; everyone else consumes l(0).
    let x = prefs.iter().map(|p| agent_demand(p, 0.0).lo).collect();
    Ok(Clearing { lambda: 0.0, x, ..plain })
}

/// `e_i = a_i - x_i - (C - sum x) / n`: zero net trade, and `x + e <= a`
/// whenever consumption does not exceed supply.
pub(crate) fn trades(production: &[f64], x: &[f64]) -> Vec<f64> {
    let unused = production.iter().sum::<f64>() - x.iter().sum::<f64>();
    let write_off = unused / production.len() as f64;
    production.iter().zip(x).map(|(a, x)| a - x - write_off).collect()
}
