//! Market clearing by bisection on the price.
//!
//! Works for any mix of families: differentiable agents contribute
//! `max(l(lambda), 0)`, piecewise-linear agents a demand interval. The
//! bracket is kept so that demand is too high at `lo` and too low at `hi`.

use super::demand::agent_demand;
use super::{check_valid, finish, Clearing, DemandCurve, Interval, SolveError, SolverConfig};
use crate::model::{EquilibriumResult, Family, MarketInstance, Method, UtilityParams};

pub fn solve_mtes_generic(
    instance: &MarketInstance,
    cfg: &SolverConfig,
) -> Result<EquilibriumResult, SolveError> {
    check_valid(instance)?;
    let clearing = clear_generic(&instance.preferences, instance.capacity(), cfg)?;
    finish(instance, clearing, None, cfg)
}

/// Where the aggregate demand set sits relative to `capacity`.
fn side(d: Interval, capacity: f64) -> std::cmp::Ordering {
    use std::cmp::Ordering::*;
    if d.lo > capacity {
        Greater
    } else if d.hi < capacity {
        Less
    } else {
        Equal
    }
}

pub(crate) fn clear_generic(
    prefs: &[UtilityParams],
    capacity: f64,
    cfg: &SolverConfig,
) -> Result<Clearing, SolveError> {
    use std::cmp::Ordering::*;

    let curve = DemandCurve::new(prefs);
    let tol = cfg.balance_tol(capacity);
    let has_pwl = prefs.iter().any(|p| p.family() == Family::PiecewiseLinear);
    let done = |lambda: f64, iterations: usize| {
        let x = fill(prefs, lambda, capacity);
        let degenerate = lambda == 0.0 && has_pwl && (capacity - curve.aggregate(0.0).lo) <= tol;
        Ok(Clearing { lambda, x, method: Method::Bisection, degenerate, iterations })
    };

    // Piecewise-linear demand is unbounded below price zero, so zero is the
    // floor; it clears whenever satiated demand fits within C.
    if has_pwl && curve.aggregate(0.0).lo <= capacity {
        return done(0.0, 0);
    }

    let max_bp = curve.max_breakpoint();
    let mut hi = if max_bp.is_finite() { max_bp } else { 1.0 };
    let mut lo = if has_pwl { 0.0 } else { hi.min(0.0) };
    let mut expansions = 0;
    loop {
        match side(curve.aggregate(hi), capacity) {
            Less => break,
            Equal => return done(hi, 0),
            Greater => {
                lo = hi;
                hi = 2.0 * hi.abs().max(1.0);
            }
        }
        expansions += 1;
        if expansions > cfg.max_bisection_iters || !hi.is_finite() {
            return Err(SolveError::BracketFailure { lo, hi });
        }
    }
    let mut step = hi.abs().max(1.0);
    loop {
        match side(curve.aggregate(lo), capacity) {
            Greater => break,
            Equal => return done(lo, 0),
            Less => {
                hi = lo;
                lo -= step;
                step *= 2.0;
            }
        }
        expansions += 1;
        if expansions > cfg.max_bisection_iters || !lo.is_finite() {
            return Err(SolveError::BracketFailure { lo, hi });
        }
    }

    let mut iterations = 0;
    while iterations < cfg.max_bisection_iters {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        match side(curve.aggregate(mid), capacity) {
            Greater => lo = mid,
            Less => hi = mid,
            Equal => return done(mid, iterations),
        }
        if hi - lo <= cfg.lambda_tol {
            let d = curve.aggregate(lo + 0.5 * (hi - lo));
            if d.is_point() && (d.lo - capacity).abs() <= tol {
                break;
            }
        }
    }

    // A piecewise-linear tier whose beta lies inside the final bracket is
    // where demand jumps across C; otherwise take the bracket centre.
    let tier = prefs
        .iter()
        .filter_map(|p| match p {
            UtilityParams::PiecewiseLinear { beta, .. } if lo <= *beta && *beta <= hi => Some(*beta),
            _ => None,
        })
        .find(|&beta| {
            let d = curve.aggregate(beta);
            d.lo <= capacity + tol && capacity - tol <= d.hi
        });
    let lambda = tier.unwrap_or(lo + 0.5 * (hi - lo));
    let x = fill(prefs, lambda, capacity);
    let residual = (x.iter().sum::<f64>() - capacity).abs();
    if residual > tol {
        return Err(SolveError::NotConverged { iterations, residual });
    }
    Ok(Clearing { lambda, x, method: Method::Bisection, degenerate: false, iterations })
}

/// Pick one allocation from the best-response sets at `lambda` summing to `capacity`.
///
/// Unbounded sets (piecewise-linear agents at price zero) split the surplus
/// equally; bounded ones are filled in proportion to their width.
fn fill(prefs: &[UtilityParams], lambda: f64, capacity: f64) -> Vec<f64> {
    let sets: Vec<Interval> = prefs.iter().map(|p| agent_demand(p, lambda)).collect();
    let floor: f64 = sets.iter().map(|s| s.lo).sum();
    let unbounded = sets.iter().filter(|s| s.hi == f64::INFINITY && s.lo.is_finite()).count();
    if unbounded > 0 {
        let share = (capacity - floor) / unbounded as f64;
        return sets
            .iter()
            .map(|s| if s.hi == f64::INFINITY { s.lo + share } else { s.lo })
            .collect();
    }
    let ceiling: f64 = sets.iter().map(|s| s.hi).sum();
    let t = if ceiling > floor { ((capacity - floor) / (ceiling - floor)).clamp(0.0, 1.0) } else { 0.0 };
    sets.iter().map(|s| s.lo + t * (s.hi - s.lo)).collect()
}
