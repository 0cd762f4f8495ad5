use serde::Serialize;

use super::demand::agent_demand;
use super::{Interval, SolverConfig};
use crate::model::{EquilibriumResult, MarketInstance, ModelKind, UtilityParams};

/// Optimality certificate for a claimed equilibrium.
///
/// Per-agent checks are against the agent's own payoff problem at the
/// reported price; market checks are the balance and trade constraints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktReport {
    /// `|sum x - C|`; for trading markets only enforced at a positive price.
    pub balance_violation: f64,
    /// Largest distance (kW) from an agent's consumption to its best-response set.
    pub max_response_violation: f64,
    /// Largest `|h'(x) - lambda|` over active differentiable agents, or
    /// `h'(0) - lambda > 0` over inactive ones.
    pub max_stationarity_violation: f64,
    pub worst_agent: Option<usize>,
    /// `|sum e|` (trading markets).
    pub trade_balance_violation: f64,
    /// Largest `x + e - a` excess, or slack when the price is positive (trading markets).
    pub trade_feasibility_violation: f64,
    /// `max(0, -lambda)` (trading markets).
    pub price_sign_violation: f64,
    pub max_violation: f64,
}

impl KktReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation <= tol
    }
}

pub fn verify_kkt(instance: &MarketInstance, result: &EquilibriumResult, cfg: &SolverConfig) -> KktReport {
    let lambda = result.lambda_star;
    let capacity = instance.capacity();
    let trading = instance.model == ModelKind::MtesSt;

    let mut max_response: f64 = 0.0;
    let mut max_stationarity: f64 = 0.0;
    let mut worst_agent = None;
    let mut worst = 0.0;
    for (i, (p, &x)) in instance.preferences.iter().zip(&result.x_star).enumerate() {
        let set = response_set(p, lambda, cfg.lambda_tol);
        let response = set.distance(x);
        let stationarity = match p.derivative(x) {
            Some(dx) if x > 0.0 => (dx - lambda).abs(),
            Some(_) => (p.derivative(0.0).unwrap_or(lambda) - lambda).max(0.0),
            None => 0.0,
        };
        max_response = max_response.max(response);
        max_stationarity = max_stationarity.max(stationarity);
        if response.max(stationarity) > worst {
            worst = response.max(stationarity);
            worst_agent = Some(i);
        }
    }

    let consumption_gap = (result.x_star.iter().sum::<f64>() - capacity).abs();
    let (balance, trade_balance, feasibility, sign) = if trading {
        match &result.e_star {
            Some(e) => {
                let feasibility = instance
                    .production
                    .iter()
                    .zip(&result.x_star)
                    .zip(e)
                    .map(|((a, x), e)| {
                        let slack = a - x - e;
                        if lambda > 0.0 {
                            slack.abs()
                        } else {
                            (-slack).max(0.0)
                        }
                    })
                    .fold(0.0, f64::max);
                let balance = if lambda > 0.0 { consumption_gap } else { 0.0 };
                (balance, e.iter().sum::<f64>().abs(), feasibility, (-lambda).max(0.0))
            }
            None => (consumption_gap, f64::INFINITY, f64::INFINITY, (-lambda).max(0.0)),
        }
    } else {
        (consumption_gap, 0.0, 0.0, 0.0)
    };

    let max_violation = [balance, max_response, max_stationarity, trade_balance, feasibility, sign]
        .into_iter()
        .fold(0.0, f64::max);
    KktReport {
        balance_violation: balance,
        max_response_violation: max_response,
        max_stationarity_violation: max_stationarity,
        worst_agent,
        trade_balance_violation: trade_balance,
        trade_feasibility_violation: feasibility,
        price_sign_violation: sign,
        max_violation,
    }
}

/// Best-response set, widening the piecewise-linear kinks by `lambda_tol`.
fn response_set(p: &UtilityParams, lambda: f64, lambda_tol: f64) -> Interval {
    if let UtilityParams::PiecewiseLinear { beta, phi } = p {
        if lambda.abs() <= lambda_tol {
            return Interval::new(*phi, f64::INFINITY);
        }
        if (lambda - beta).abs() <= lambda_tol {
            return Interval::new(0.0, *phi);
        }
    }
    agent_demand(p, lambda)
}
