//! Equilibrium solvers.
//!
//! Every solver computes the market-clearing price `lambda*` as the dual
//! price of the balance constraint `sum x_i = C`, together with the
//! agents' best responses at that price. Quadratic and piecewise-linear
//! markets have exact breakpoint algorithms; anything else is cleared by
//! bisection on the aggregate demand.

mod best_response;
mod demand;
mod generic;
mod kkt;
mod pwl;
mod quadratic;
mod trading;

pub use best_response::{pwl_best_response, quadratic_best_response, Interval};
pub use demand::DemandCurve;
pub use generic::solve_mtes_generic;
pub use kkt::{verify_kkt, KktReport};
pub use pwl::solve_mtes_pwl;
pub use quadratic::solve_mtes_quadratic;
pub use trading::{solve_mtes_st, solve_mtes_st_with};

use std::fmt;
use std::str::FromStr;

use crate::model::{
    validate_instance, Diagnostics, EquilibriumResult, Family, MarketInstance, Method, ModelKind,
    UtilityParams, ValidationReport,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Absolute tolerance on `|sum x - C|`. `None` means `1e-9 * max(1, C)`.
    pub balance_tol: Option<f64>,
    /// Bisection stops once the price bracket is at most this wide.
    pub lambda_tol: f64,
    pub max_bisection_iters: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { balance_tol: None, lambda_tol: 1e-10, max_bisection_iters: 200 }
    }
}

impl SolverConfig {
    pub fn balance_tol(&self, capacity: f64) -> f64 {
        self.balance_tol.unwrap_or(1e-9 * capacity.abs().max(1.0))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("invalid instance: {0}")]
    Invalid(ValidationReport),
    #[error("closed form requires homogeneous family")]
    ClosedFormRequiresHomogeneous,
    #[error("agent {agent}: expected {expected} utility")]
    WrongFamily { agent: usize, expected: &'static str },
    #[error("no sign change of aggregate demand in price bracket [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },
    #[error("bisection stopped after {iterations} iterations with balance residual {residual}")]
    NotConverged { iterations: usize, residual: f64 },
}

impl SolveError {
    /// Errors caused by the input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            SolveError::Invalid(_)
                | SolveError::ClosedFormRequiresHomogeneous
                | SolveError::WrongFamily { .. }
        )
    }
}

/// Solver selection for [`solve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodChoice {
    /// Closed form for homogeneous quadratic or piecewise-linear markets,
    /// bisection otherwise.
    #[default]
    Auto,
    Closed,
    Bisect,
}

impl FromStr for MethodChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            "closed" => Ok(MethodChoice::Closed),
            "bisect" => Ok(MethodChoice::Bisect),
            other => Err(format!("unknown method {other:?} (expected auto|closed|bisect)")),
        }
    }
}

impl fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodChoice::Auto => "auto",
            MethodChoice::Closed => "closed",
            MethodChoice::Bisect => "bisect",
        })
    }
}

/// Price and consumption clearing a given capacity.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Clearing {
    pub lambda: f64,
    pub x: Vec<f64>,
    pub method: Method,
    pub degenerate: bool,
    pub iterations: usize,
}

/// Solve the instance according to its model kind.
pub fn solve(
    instance: &MarketInstance,
    cfg: &SolverConfig,
    choice: MethodChoice,
) -> Result<EquilibriumResult, SolveError> {
    match instance.model {
        ModelKind::Mtes => {
            check_valid(instance)?;
            let clearing = clear(&instance.preferences, instance.capacity(), cfg, choice)?;
            finish(instance, clearing, None, cfg)
        }
        ModelKind::MtesSt => solve_mtes_st_with(instance, cfg, choice),
    }
}

pub(crate) fn check_valid(instance: &MarketInstance) -> Result<(), SolveError> {
    let report = validate_instance(instance);
    if report.is_ok() {
        Ok(())
    } else {
        Err(SolveError::Invalid(report))
    }
}

/// Clear the MTES market for `capacity` with the chosen algorithm.
pub(crate) fn clear(
    prefs: &[UtilityParams],
    capacity: f64,
    cfg: &SolverConfig,
    choice: MethodChoice,
) -> Result<Clearing, SolveError> {
    let family = homogeneous_family(prefs);
    match (choice, family) {
        (MethodChoice::Bisect, _) => generic::clear_generic(prefs, capacity, cfg),
        (_, Some(Family::Quadratic)) => quadratic::clear_quadratic(prefs, capacity),
        (_, Some(Family::PiecewiseLinear)) => pwl::clear_pwl(prefs, capacity, cfg),
        (MethodChoice::Closed, _) => Err(SolveError::ClosedFormRequiresHomogeneous),
        (MethodChoice::Auto, _) => generic::clear_generic(prefs, capacity, cfg),
    }
}

fn homogeneous_family(prefs: &[UtilityParams]) -> Option<Family> {
    let first = prefs.first()?.family();
    prefs.iter().all(|p| p.family() == first).then_some(first)
}

/// Assemble a result: residuals, diagnostics and the KKT certificate.
pub(crate) fn finish(
    instance: &MarketInstance,
    clearing: Clearing,
    e_star: Option<Vec<f64>>,
    cfg: &SolverConfig,
) -> Result<EquilibriumResult, SolveError> {
    let capacity = instance.capacity();
    let consumption_gap = (clearing.x.iter().sum::<f64>() - capacity).abs();
    // With trading, the balance constraint is on the trades; consumption only
    // has to clear C when the price is positive.
    let balance_residual = match &e_star {
        None => consumption_gap,
        Some(e) => {
            let trade_gap = e.iter().sum::<f64>().abs();
            if clearing.lambda > 0.0 {
                trade_gap.max(consumption_gap)
            } else {
                trade_gap
            }
        }
    };
    let active_set = clearing
        .x
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > 0.0)
        .map(|(i, _)| i)
        .collect();
    let mut result = EquilibriumResult {
        lambda_star: clearing.lambda,
        x_star: clearing.x,
        e_star,
        method: clearing.method,
        balance_residual,
        kkt_max_violation: 0.0,
        diagnostics: Diagnostics {
            active_set,
            degenerate: clearing.degenerate,
            iterations: clearing.iterations,
        },
    };
    result.kkt_max_violation = verify_kkt(instance, &result, cfg).max_violation;
    Ok(result)
}

pub(crate) fn expect_family(
    prefs: &[UtilityParams],
    family: Family,
    expected: &'static str,
) -> Result<(), SolveError> {
    match prefs.iter().position(|p| p.family() != family) {
        Some(agent) => Err(SolveError::WrongFamily { agent, expected }),
        None => Ok(()),
    }
}
