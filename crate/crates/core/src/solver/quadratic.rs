//! Exact water-filling for linear-quadratic utilities.
//!
//! Aggregate demand `D(lambda) = sum max(m_i - lambda / b_i, 0)` is
//! continuous and piecewise linear with kinks at the choke prices
//! `m_i b_i`. Walking the kinks from the top finds the segment on which
//! `D` crosses `C`, where the price solves a linear equation.

use super::{check_valid, expect_family, finish, quadratic_best_response, Clearing, SolveError, SolverConfig};
use crate::model::{EquilibriumResult, Family, MarketInstance, Method, UtilityParams};

pub fn solve_mtes_quadratic(
    instance: &MarketInstance,
    cfg: &SolverConfig,
) -> Result<EquilibriumResult, SolveError> {
    check_valid(instance)?;
    let clearing = clear_quadratic(&instance.preferences, instance.capacity())?;
    finish(instance, clearing, None, cfg)
}

pub(crate) fn clear_quadratic(prefs: &[UtilityParams], capacity: f64) -> Result<Clearing, SolveError> {
    expect_family(prefs, Family::Quadratic, "quadratic")?;
    let params: Vec<(f64, f64)> = prefs
        .iter()
        .map(|p| match p {
            UtilityParams::Quadratic { b, m } => (*b, *m),
            _ => unreachable!("family checked"),
        })
        .collect();

    let total_m: f64 = params.iter().map(|&(_, m)| m).sum();
    let lambda = if total_m <= capacity {
        // Every agent is active at a non-positive price.
        let inv_b: f64 = params.iter().map(|&(b, _)| 1.0 / b).sum();
        (total_m - capacity) / inv_b
    } else {
        water_fill(&params, capacity)
    };

    let x = params.iter().map(|&(b, m)| quadratic_best_response(b, m, lambda)).collect();
    Ok(Clearing { lambda, x, method: Method::ClosedFormQuadratic, degenerate: false, iterations: 0 })
}

/// Positive clearing price when `sum m > C`.
fn water_fill(params: &[(f64, f64)], capacity: f64) -> f64 {
    let mut order: Vec<(f64, usize)> =
        params.iter().enumerate().map(|(i, &(b, m))| (m * b, i)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut sum_m = 0.0;
    let mut sum_inv_b = 0.0;
    let mut k = 0;
    while k < order.len() {
        // Agents sharing a choke price enter together.
        let kink = order[k].0;
        while k < order.len() && order[k].0 == kink {
            let (b, m) = params[order[k].1];
            sum_m += m;
            sum_inv_b += 1.0 / b;
            k += 1;
        }
        let demand_at_next = match order.get(k) {
            Some(&(next, _)) => sum_m - next * sum_inv_b,
            None => f64::INFINITY,
        };
        if demand_at_next >= capacity {
            break;
        }
    }
    (sum_m - capacity) / sum_inv_b
}
