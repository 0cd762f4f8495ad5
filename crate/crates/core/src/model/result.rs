use serde::Serialize;

/// Which algorithm produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedFormQuadratic,
    BreakpointPwl,
    Bisection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Indices of agents with strictly positive consumption.
    pub active_set: Vec<usize>,
    /// Set when the price is not pinned down uniquely and a tie-break rule chose it.
    pub degenerate: bool,
    /// Outer bisection iterations (zero for closed forms).
    pub iterations: usize,
}

/// Competitive equilibrium: price, consumption and (MTES-ST) trades.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumResult {
    pub lambda_star: f64,
    pub x_star: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_star: Option<Vec<f64>>,
    pub method: Method,
    pub balance_residual: f64,
    pub kkt_max_violation: f64,
    pub diagnostics: Diagnostics,
}
