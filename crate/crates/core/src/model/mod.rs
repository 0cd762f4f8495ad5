//! Market instances: agent preferences, local production and the market
//! variant being cleared.

mod io;
mod result;

use std::fmt;
use std::sync::Arc;

pub use io::{load_instance, parse_instance, save_instance, to_json, InstanceError};
pub use result::{Diagnostics, EquilibriumResult, Method};

/// Number of grid points used when probing a custom marginal utility for
/// strict monotonicity.
const CONCAVITY_GRID: usize = 64;

/// Market variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ModelKind {
    /// Agents choose consumption only; the surplus `a - x` is settled at the price.
    #[serde(rename = "mtes")]
    Mtes,
    /// Agents also choose a trade quantity `e` with `x + e <= a`.
    #[serde(rename = "mtes_st")]
    MtesSt,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Mtes => f.write_str("mtes"),
            ModelKind::MtesSt => f.write_str("mtes_st"),
        }
    }
}

/// Utility family tag, used for solver dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Quadratic,
    PiecewiseLinear,
    Custom,
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Caller-provided strictly concave utility with its derivative.
///
/// The solvers only ever call `deriv`; `value` is kept for reporting and
/// for numerical verification.
#[derive(Clone)]
pub struct CustomUtility {
    pub label: String,
    value: ScalarFn,
    deriv: ScalarFn,
}

impl CustomUtility {
    pub fn new<V, D>(label: impl Into<String>, value: V, deriv: D) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            value: Arc::new(value),
            deriv: Arc::new(deriv),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        (self.deriv)(x)
    }
}

impl fmt::Debug for CustomUtility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomUtility").field("label", &self.label).finish_non_exhaustive()
    }
}

/// Preference parameters of a single agent.
#[derive(Debug, Clone)]
pub enum UtilityParams {
    /// `h(x) = -b x^2 / 2 + m b x`; `m` is the satiation load.
    Quadratic { b: f64, m: f64 },
    /// `h(x) = min(beta x, phi beta)`; `beta` is the marginal value up to load `phi`.
    PiecewiseLinear { beta: f64, phi: f64 },
    Custom(CustomUtility),
}

impl UtilityParams {
    pub fn quadratic(b: f64, m: f64) -> Self {
        UtilityParams::Quadratic { b, m }
    }

    pub fn pwl(beta: f64, phi: f64) -> Self {
        UtilityParams::PiecewiseLinear { beta, phi }
    }

    pub fn custom<V, D>(label: impl Into<String>, value: V, deriv: D) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        UtilityParams::Custom(CustomUtility::new(label, value, deriv))
    }

    pub fn family(&self) -> Family {
        match self {
            UtilityParams::Quadratic { .. } => Family::Quadratic,
            UtilityParams::PiecewiseLinear { .. } => Family::PiecewiseLinear,
            UtilityParams::Custom(_) => Family::Custom,
        }
    }

    /// Utility value `h(x)`.
    pub fn value(&self, x: f64) -> f64 {
        match self {
            UtilityParams::Quadratic { b, m } => -0.5 * b * x * x + m * b * x,
            UtilityParams::PiecewiseLinear { beta, phi } => (beta * x).min(phi * beta),
            UtilityParams::Custom(c) => c.value(x),
        }
    }

    /// Marginal utility `h'(x)`, or `None` for the piecewise-linear family.
    pub fn derivative(&self, x: f64) -> Option<f64> {
        match self {
            UtilityParams::Quadratic { b, m } => Some(b * (m - x)),
            UtilityParams::PiecewiseLinear { .. } => None,
            UtilityParams::Custom(c) => Some(c.deriv(x)),
        }
    }

    /// Price above which the agent consumes nothing (`h'(0)`, or `beta`).
    pub fn choke_price(&self) -> f64 {
        match self {
            UtilityParams::Quadratic { b, m } => m * b,
            UtilityParams::PiecewiseLinear { beta, .. } => *beta,
            UtilityParams::Custom(c) => c.deriv(0.0),
        }
    }

    /// Violations of this agent's parameter domain. `probe_span` bounds the
    /// grid on which a custom derivative is checked for strict decrease.
    fn violations(&self, agent: usize, probe_span: f64, out: &mut Vec<Violation>) {
        let positive = |name: &'static str, v: f64, out: &mut Vec<Violation>| {
            if !v.is_finite() {
                out.push(Violation::NonFinite { agent: Some(agent), field: name });
            } else if v <= 0.0 {
                out.push(Violation::NonPositiveParameter { agent, field: name, value: v });
            }
        };
        match self {
            UtilityParams::Quadratic { b, m } => {
                positive("b", *b, out);
                positive("m", *m, out);
            }
            UtilityParams::PiecewiseLinear { beta, phi } => {
                positive("beta", *beta, out);
                positive("phi", *phi, out);
            }
            UtilityParams::Custom(c) => {
                let span = if probe_span.is_finite() && probe_span > 0.0 { probe_span } else { 1.0 };
                let mut prev = c.deriv(0.0);
                for k in 1..=CONCAVITY_GRID {
                    let x = span * k as f64 / CONCAVITY_GRID as f64;
                    let d = c.deriv(x);
                    if !d.is_finite() || prev.is_nan() || d >= prev {
                        out.push(Violation::NotStrictlyConcave { agent, at: x });
                        return;
                    }
                    prev = d;
                }
            }
        }
    }
}

/// A market: local production per agent, preferences per agent and the variant.
#[derive(Debug, Clone)]
pub struct MarketInstance {
    pub model: ModelKind,
    pub production: Vec<f64>,
    pub preferences: Vec<UtilityParams>,
}

impl MarketInstance {
    pub fn new(model: ModelKind, production: Vec<f64>, preferences: Vec<UtilityParams>) -> Self {
        Self { model, production, preferences }
    }

    /// Quadratic instance from parallel `a`, `b`, `m` slices.
    pub fn quadratic(model: ModelKind, a: &[f64], b: &[f64], m: &[f64]) -> Self {
        let prefs = b.iter().zip(m).map(|(&b, &m)| UtilityParams::quadratic(b, m)).collect();
        Self::new(model, a.to_vec(), prefs)
    }

    /// Piecewise-linear instance from parallel `a`, `beta`, `phi` slices.
    pub fn pwl(model: ModelKind, a: &[f64], beta: &[f64], phi: &[f64]) -> Self {
        let prefs = beta.iter().zip(phi).map(|(&b, &p)| UtilityParams::pwl(b, p)).collect();
        Self::new(model, a.to_vec(), prefs)
    }

    pub fn n(&self) -> usize {
        self.preferences.len()
    }

    /// Network generation `C = sum a_i`.
    pub fn capacity(&self) -> f64 {
        self.production.iter().sum()
    }

    pub fn with_model(mut self, model: ModelKind) -> Self {
        self.model = model;
        self
    }

    /// The common family, or `None` when families are mixed (or the instance is empty).
    pub fn family(&self) -> Option<Family> {
        let first = self.preferences.first()?.family();
        self.preferences.iter().all(|p| p.family() == first).then_some(first)
    }

    /// Whether dispatch will route this instance to the bisection solver.
    pub fn requires_generic_solver(&self) -> bool {
        !matches!(self.family(), Some(Family::Quadratic) | Some(Family::PiecewiseLinear))
    }
}

/// A single violated instance invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoAgents,
    LengthMismatch { production: usize, preferences: usize },
    NegativeProduction { agent: usize, value: f64 },
    NonFinite { agent: Option<usize>, field: &'static str },
    ZeroCapacity,
    NonPositiveParameter { agent: usize, field: &'static str, value: f64 },
    NotStrictlyConcave { agent: usize, at: f64 },
}

impl Violation {
    /// The offending agent, for per-agent violations.
    pub fn agent(&self) -> Option<usize> {
        match self {
            Violation::NegativeProduction { agent, .. }
            | Violation::NonPositiveParameter { agent, .. }
            | Violation::NotStrictlyConcave { agent, .. } => Some(*agent),
            Violation::NonFinite { agent, .. } => *agent,
            _ => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoAgents => f.write_str("n >= 1 required"),
            Violation::LengthMismatch { production, preferences } => write!(
                f,
                "length mismatch: {production} production values, {preferences} preferences"
            ),
            Violation::NegativeProduction { agent, value } => {
                write!(f, "agent {agent}: production must be non-negative (got {value})")
            }
            Violation::NonFinite { agent: Some(i), field } => {
                write!(f, "agent {i}: {field} must be finite")
            }
            Violation::NonFinite { agent: None, field } => write!(f, "{field} must be finite"),
            Violation::ZeroCapacity => f.write_str("C>0 required"),
            Violation::NonPositiveParameter { agent, field, value } => {
                write!(f, "agent {agent}: {field} must be positive (got {value})")
            }
            Violation::NotStrictlyConcave { agent, at } => {
                write!(f, "agent {agent}: marginal utility not strictly decreasing near x={at}")
            }
        }
    }
}

/// Outcome of [`validate_instance`]; empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Check every instance invariant and collect the violations.
pub fn validate_instance(instance: &MarketInstance) -> ValidationReport {
    let mut violations = Vec::new();
    let n = instance.preferences.len();
    if n == 0 {
        violations.push(Violation::NoAgents);
    }
    if instance.production.len() != n {
        violations.push(Violation::LengthMismatch {
            production: instance.production.len(),
            preferences: n,
        });
    }
    let mut finite = true;
    for (i, &a) in instance.production.iter().enumerate() {
        if !a.is_finite() {
            finite = false;
            violations.push(Violation::NonFinite { agent: Some(i), field: "a" });
        } else if a < 0.0 {
            violations.push(Violation::NegativeProduction { agent: i, value: a });
        }
    }
    let c = instance.capacity();
    if finite && c <= 0.0 {
        violations.push(Violation::ZeroCapacity);
    }
    // Probe custom derivatives over a range comfortably past a fair share.
    let span = 2.0 * c.max(1.0);
    for (i, p) in instance.preferences.iter().enumerate() {
        p.violations(i, span, &mut violations);
    }
    ValidationReport { violations }
}
