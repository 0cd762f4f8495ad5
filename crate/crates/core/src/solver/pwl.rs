//! Breakpoint search for piecewise-linear utilities `min(beta x, phi beta)`.
//!
//! At a positive price every agent takes `phi` (if `beta > lambda`), nothing
//! (if `beta < lambda`) or anything in `[0, phi]` (if `beta == lambda`), so
//! the clearing price is one of the `beta` values: the first one, in
//! descending order, at which the cumulative saturation load reaches `C`.
//!
//! Tie-breaks where the equilibrium is set-valued:
//! * `sum phi <= C`: price 0, the surplus `C - sum phi` is split equally;
//! * marginal tier (`beta == lambda`): the residual is shared in proportion to `phi`.

use super::{check_valid, expect_family, finish, Clearing, SolveError, SolverConfig};
use crate::model::{EquilibriumResult, Family, MarketInstance, Method, UtilityParams};

pub fn solve_mtes_pwl(
    instance: &MarketInstance,
    cfg: &SolverConfig,
) -> Result<EquilibriumResult, SolveError> {
    check_valid(instance)?;
    let clearing = clear_pwl(&instance.preferences, instance.capacity(), cfg)?;
    finish(instance, clearing, None, cfg)
}

pub(crate) fn clear_pwl(
    prefs: &[UtilityParams],
    capacity: f64,
    cfg: &SolverConfig,
) -> Result<Clearing, SolveError> {
    expect_family(prefs, Family::PiecewiseLinear, "piecewise-linear")?;
    let params: Vec<(f64, f64)> = prefs
        .iter()
        .map(|p| match p {
            UtilityParams::PiecewiseLinear { beta, phi } => (*beta, *phi),
            _ => unreachable!("family checked"),
        })
        .collect();
    let tol = cfg.balance_tol(capacity);
    let n = params.len();

    let total_phi: f64 = params.iter().map(|&(_, phi)| phi).sum();
    if total_phi <= capacity {
        let surplus = capacity - total_phi;
        let share = surplus / n as f64;
        return Ok(Clearing {
            lambda: 0.0,
            x: params.iter().map(|&(_, phi)| phi + share).collect(),
            method: Method::BreakpointPwl,
            degenerate: surplus <= tol,
            iterations: 0,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| params[j].0.total_cmp(&params[i].0));

    let mut x = vec![0.0; n];
    let mut above = 0.0;
    let mut start = 0;
    while start < n {
        let beta = params[order[start]].0;
        let end = start + order[start..].iter().take_while(|&&i| params[i].0 == beta).count();
        let tier = &order[start..end];
        let tier_phi: f64 = tier.iter().map(|&i| params[i].1).sum();
        if above + tier_phi >= capacity || end == n {
            let residual = capacity - above;
            for &i in tier {
                x[i] = params[i].1 * (residual / tier_phi);
            }
            for &i in &order[..start] {
                x[i] = params[i].1;
            }
            return Ok(Clearing {
                lambda: beta,
                x,
                method: Method::BreakpointPwl,
                degenerate: (above + tier_phi - capacity).abs() <= tol,
                iterations: 0,
            });
        }
        above += tier_phi;
        start = end;
    }
    unreachable!("sum phi > C guarantees a crossing tier")
}
