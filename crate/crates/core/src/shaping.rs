//! Preference boxes that keep the clearing price below a threshold.
//!
//! A box `Theta` of preference parameters is admissible for a threshold
//! `lambda_dagger` when every market whose agents all draw parameters from
//! `Theta` clears at `lambda* <= lambda_dagger`. For the two closed-form
//! families the test reduces to a comparison at the box corner.

use serde::Serialize;

use crate::model::{MarketInstance, ModelKind, UtilityParams};

/// Family-tagged parameter bounds.
#[derive(Debug, Clone)]
pub enum ShapingBounds {
    /// `Theta = (0, b_max] x (0, m_max]`.
    Quadratic { b_max: f64, m_max: f64 },
    /// `Theta = (0, beta_max] x (0, phi_max]`.
    Pwl { beta_max: f64, phi_max: f64 },
    /// Every agent shares the same parameters.
    Homogeneous(UtilityParams),
}

#[derive(Debug, Clone)]
pub struct ShapingQuery {
    pub threshold: f64,
    pub n: usize,
    pub capacity: f64,
    pub bounds: ShapingBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BindingCondition {
    /// `m_max <= C/n`: the price can never be positive.
    MBelowCapacityShare,
    /// `b_max <= n lambda_dagger / (n m_max - C)`.
    BMaxBound,
    /// `phi_max < C/n`: the price is always zero.
    PhiBelowCapacityShare,
    /// `beta_max <= lambda_dagger`.
    BetaMaxBound,
    /// `h'(C/n) <= lambda_dagger`.
    HomogeneousDerivative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapingVerdict {
    pub admissible: bool,
    /// Largest clearing price over the box, when known.
    pub worst_case_lambda: Option<f64>,
    /// The condition that decided the verdict.
    pub binding_condition: BindingCondition,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShapingError {
    #[error("{field} must be positive (got {value})")]
    NonPositive { field: &'static str, value: f64 },
    #[error("n >= 1 required")]
    NoAgents,
    #[error("homogeneous check needs a differentiable utility; piecewise-linear is not")]
    NotDifferentiable,
}

fn positive(field: &'static str, value: f64) -> Result<(), ShapingError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ShapingError::NonPositive { field, value })
    }
}

fn check_common(n: usize, capacity: f64, threshold: f64) -> Result<(), ShapingError> {
    if n == 0 {
        return Err(ShapingError::NoAgents);
    }
    positive("C", capacity)?;
    positive("lambda_dagger", threshold)
}

/// Worst-case clearing price over the quadratic box, attained when every
/// agent sits at `(b_max, m_max)`.
pub fn chi_theta_quadratic(b_max: f64, m_max: f64, n: usize, capacity: f64) -> f64 {
    let n = n as f64;
    (b_max * (n * m_max - capacity) / n).max(0.0)
}

pub fn check_quadratic_set(
    b_max: f64,
    m_max: f64,
    n: usize,
    capacity: f64,
    threshold: f64,
) -> Result<ShapingVerdict, ShapingError> {
    check_common(n, capacity, threshold)?;
    positive("b_max", b_max)?;
    positive("m_max", m_max)?;
    let share = capacity / n as f64;
    let worst = chi_theta_quadratic(b_max, m_max, n, capacity);
    if m_max <= share {
        return Ok(ShapingVerdict {
            admissible: true,
            worst_case_lambda: Some(worst),
            binding_condition: BindingCondition::MBelowCapacityShare,
        });
    }
    let nf = n as f64;
    let bound = nf * threshold / (nf * m_max - capacity);
    Ok(ShapingVerdict {
        admissible: b_max <= bound,
        worst_case_lambda: Some(worst),
        binding_condition: BindingCondition::BMaxBound,
    })
}

pub fn check_pwl_set(
    beta_max: f64,
    phi_max: f64,
    n: usize,
    capacity: f64,
    threshold: f64,
) -> Result<ShapingVerdict, ShapingError> {
    check_common(n, capacity, threshold)?;
    positive("beta_max", beta_max)?;
    positive("phi_max", phi_max)?;
    if phi_max < capacity / n as f64 {
        return Ok(ShapingVerdict {
            admissible: true,
            worst_case_lambda: Some(0.0),
            binding_condition: BindingCondition::PhiBelowCapacityShare,
        });
    }
    Ok(ShapingVerdict {
        admissible: beta_max <= threshold,
        worst_case_lambda: Some(beta_max),
        binding_condition: BindingCondition::BetaMaxBound,
    })
}

/// Homogeneous markets clear at `h'(C/n)`.
pub fn check_homogeneous(
    theta: &UtilityParams,
    n: usize,
    capacity: f64,
    threshold: f64,
) -> Result<ShapingVerdict, ShapingError> {
    check_common(n, capacity, threshold)?;
    if let UtilityParams::Quadratic { b, m } = theta {
        positive("b", *b)?;
        positive("m", *m)?;
    }
    let price = theta
        .derivative(capacity / n as f64)
        .ok_or(ShapingError::NotDifferentiable)?;
    Ok(ShapingVerdict {
        admissible: price <= threshold,
        worst_case_lambda: Some(price),
        binding_condition: BindingCondition::HomogeneousDerivative,
    })
}

impl ShapingQuery {
    pub fn check(&self) -> Result<ShapingVerdict, ShapingError> {
        let (n, c, t) = (self.n, self.capacity, self.threshold);
        match &self.bounds {
            ShapingBounds::Quadratic { b_max, m_max } => check_quadratic_set(*b_max, *m_max, n, c, t),
            ShapingBounds::Pwl { beta_max, phi_max } => check_pwl_set(*beta_max, *phi_max, n, c, t),
            ShapingBounds::Homogeneous(theta) => check_homogeneous(theta, n, c, t),
        }
    }

    /// Market with every agent at the box corner and production `C/n` each.
    pub fn corner_instance(&self, model: ModelKind) -> MarketInstance {
        let theta = match &self.bounds {
            ShapingBounds::Quadratic { b_max, m_max } => UtilityParams::quadratic(*b_max, *m_max),
            ShapingBounds::Pwl { beta_max, phi_max } => UtilityParams::pwl(*beta_max, *phi_max),
            ShapingBounds::Homogeneous(theta) => theta.clone(),
        };
        MarketInstance::new(
            model,
            vec![self.capacity / self.n as f64; self.n],
            vec![theta; self.n],
        )
    }
}
