/// Closed interval `[lo, hi]`; `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// Distance from `x` to the interval (zero inside).
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }
}

/// Optimal consumption `max(m - lambda / b, 0)` of a quadratic agent.
pub fn quadratic_best_response(b: f64, m: f64, lambda: f64) -> f64 {
    (m - lambda / b).max(0.0)
}

/// Optimal consumption set of a piecewise-linear agent at `lambda`.
///
/// Set-valued at `lambda = 0` (anything past `phi`) and at `lambda = beta`
/// (anything up to `phi`). A negative price makes every extra unit
/// profitable, which is reported as the point at infinity.
pub fn pwl_best_response(beta: f64, phi: f64, lambda: f64) -> Interval {
    if lambda < 0.0 {
        Interval::point(f64::INFINITY)
    } else if lambda == 0.0 {
        Interval::new(phi, f64::INFINITY)
    } else if lambda < beta {
        Interval::point(phi)
    } else if lambda == beta {
        Interval::new(0.0, phi)
    } else {
        Interval::point(0.0)
    }
}
