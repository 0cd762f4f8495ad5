use super::best_response::{pwl_best_response, quadratic_best_response, Interval};
use crate::model::{CustomUtility, UtilityParams};

/// Price-to-demand map of a set of agents.
///
/// For differentiable utilities the demand is `max(l(lambda), 0)` where `l`
/// inverts the marginal utility; piecewise-linear agents contribute their
/// (possibly set-valued) best response.
#[derive(Debug, Clone, Copy)]
pub struct DemandCurve<'a> {
    prefs: &'a [UtilityParams],
}

impl<'a> DemandCurve<'a> {
    pub fn new(prefs: &'a [UtilityParams]) -> Self {
        Self { prefs }
    }

    pub fn agent(&self, i: usize, lambda: f64) -> Interval {
        agent_demand(&self.prefs[i], lambda)
    }

    /// Sum of the per-agent demand sets (Minkowski sum of intervals).
    pub fn aggregate(&self, lambda: f64) -> Interval {
        let (lo, hi) = self.prefs.iter().fold((0.0, 0.0), |(lo, hi), p| {
            let d = agent_demand(p, lambda);
            (lo + d.lo, hi + d.hi)
        });
        Interval { lo, hi }
    }

    /// Per-agent choke prices: above these the agent consumes nothing.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.prefs.iter().map(UtilityParams::choke_price).collect()
    }

    pub fn max_breakpoint(&self) -> f64 {
        self.prefs.iter().map(UtilityParams::choke_price).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn agent_demand(p: &UtilityParams, lambda: f64) -> Interval {
    match p {
        UtilityParams::Quadratic { b, m } => Interval::point(quadratic_best_response(*b, *m, lambda)),
        UtilityParams::PiecewiseLinear { beta, phi } => pwl_best_response(*beta, *phi, lambda),
        UtilityParams::Custom(c) => Interval::point(invert_marginal(c, lambda)),
    }
}

/// `max(l(lambda), 0)` for a custom utility, by bisection on `h'(x) = lambda`.
/// Returns infinity when `h'` stays above `lambda` for every representable `x`.
pub(crate) fn invert_marginal(c: &CustomUtility, lambda: f64) -> f64 {
    if c.deriv(0.0) <= lambda {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while c.deriv(hi) > lambda {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if c.deriv(mid) > lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}
