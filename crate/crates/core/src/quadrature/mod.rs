//! One-dimensional and triangular adaptive quadrature.
//!
//! Every reduction formula in this crate ends in one of two shapes: a 1-D
//! integral, or the nested integral `∫_a^b dv ∫_a^v g(u, v) du` over a
//! triangle. Both are handled here by globally adaptive bisection with an
//! embedded 7/15-point Gauss–Kronrod pair. The rule is open, so integrands
//! may be singular (or undefined) at panel endpoints.
//!
//! Integrands are assumed piecewise continuous. Jumps and integrable endpoint
//! singularities are handled by repeated bisection, at some cost in
//! evaluations; callers that know where a jump sits should split there.

mod adaptive;
mod rules;
mod transform;

use serde::Serialize;
use thiserror::Error;

pub use rules::GaussLegendre;
pub use transform::{transform_unbounded, transform_unbounded_with, Substitution, UnboundedMap};

pub(crate) use adaptive::{adaptive, Budget};

/// Integration domain `(lower, upper)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    lower: f64,
    upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self, QuadError> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(QuadError::InvalidInterval { lower, upper });
        }
        Ok(Self { lower, upper })
    }

    /// The unit interval `(0, 1)`.
    pub fn unit() -> Self {
        Self {
            lower: 0.0,
            upper: 1.0,
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }
}

/// Mixed absolute/relative accuracy request plus an evaluation budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_evaluations: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rel: 1e-10,
            abs: 1e-12,
            max_evaluations: 10_000_000,
        }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64, max_evaluations: usize) -> Result<Self, QuadError> {
        if !(rel > 0.0 && rel.is_finite() && abs > 0.0 && abs.is_finite() && max_evaluations > 0) {
            return Err(QuadError::InvalidTolerance { rel, abs, max_evaluations });
        }
        Ok(Self {
            rel,
            abs,
            max_evaluations,
        })
    }

    /// The criterion every routine uses: `error <= max(abs, rel * |value|)`.
    pub fn accepts(&self, value: f64, error: f64) -> bool {
        error <= self.abs.max(self.rel * value.abs())
    }

    /// Request for a quantity that will be multiplied by `factor`: the
    /// absolute part shrinks accordingly, the relative part is unchanged.
    pub fn for_scaled(&self, factor: f64) -> Self {
        Self {
            abs: self.abs / factor.abs().max(f64::MIN_POSITIVE),
            ..*self
        }
    }

    /// Same budget, accuracy divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            rel: self.rel / factor,
            abs: self.abs / factor,
            max_evaluations: self.max_evaluations,
        }
    }
}

/// Outcome of an integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    /// Deterministic error estimate, or a standard error when `stochastic`.
    pub abs_error: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub stochastic: bool,
}

impl QuadResult {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            abs_error: 0.0,
            evaluations: 0,
            converged: true,
            stochastic: false,
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            abs_error: self.abs_error * factor.abs(),
            ..self
        }
    }

    /// Sum of two independent estimates. Standard errors add in quadrature,
    /// deterministic bounds add linearly.
    pub fn combine(self, other: Self) -> Self {
        let stochastic = self.stochastic || other.stochastic;
        let abs_error = if stochastic {
            self.abs_error.hypot(other.abs_error)
        } else {
            self.abs_error + other.abs_error
        };
        Self {
            value: self.value + other.value,
            abs_error,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
            stochastic,
        }
    }

    /// Turn a non-converged result into `ToleranceNotReached`.
    pub fn into_checked(self) -> Result<Self, QuadError> {
        if self.converged {
            Ok(self)
        } else {
            Err(QuadError::ToleranceNotReached { best: self })
        }
    }
}

/// Which level of a nested integration raised an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Single,
    Outer,
    Inner,
}

impl std::fmt::Display for Level {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Level::Single => "1-D",
            Level::Outer => "outer",
            Level::Inner => "inner",
        })
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuadError {
    #[error("tolerance not reached after {} evaluations (best estimate {}, error {})", best.evaluations, best.value, best.abs_error)]
    ToleranceNotReached { best: QuadResult },
    #[error("integrand returned {value} at x = {at} ({level} integral)")]
    NonFiniteEvaluation { at: f64, value: f64, level: Level },
    #[error("interval ({lower}, {upper}) is already bounded")]
    AlreadyBounded { lower: f64, upper: f64 },
    #[error("interval ({lower}, {upper}) is unbounded")]
    DomainUnbounded { lower: f64, upper: f64 },
    #[error("invalid interval ({lower}, {upper}): need lower < upper")]
    InvalidInterval { lower: f64, upper: f64 },
    #[error("invalid tolerance rel={rel} abs={abs} max_evaluations={max_evaluations}")]
    InvalidTolerance { rel: f64, abs: f64, max_evaluations: usize },
}

/// Adaptive estimate of `∫ f` over `domain`. Unbounded domains go through
/// the rational map of [`transform_unbounded`].
pub fn integrate_1d<F>(f: F, domain: Interval, tol: &Tolerance) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> f64,
{
    integrate_1d_with(f, domain, tol, UnboundedMap::Rational)
}

/// As [`integrate_1d`], choosing the map used for infinite endpoints.
pub fn integrate_1d_with<F>(f: F, domain: Interval, tol: &Tolerance, map: UnboundedMap) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> f64,
{
    let budget = Budget::new(tol.max_evaluations);
    let result = if domain.is_bounded() {
        let mut g = |x: f64| Ok(f(x));
        adaptive(&mut g, domain.lower, domain.upper, tol, Level::Single, &budget)?
    } else {
        let sub = transform_unbounded_with(domain, map)?;
        let mut g = |t: f64| Ok(weighted(f(sub.point(t)), sub.jacobian(t)));
        let m = sub.mapped();
        adaptive(&mut g, m.lower, m.upper, tol, Level::Single, &budget)?
    };
    result.into_checked()
}

// f(φ(t))·φ'(t) with the convention 0·∞ = 0: far in the tail the
// integrand has underflowed and the Jacobian may have overflowed.
pub(crate) fn weighted(value: f64, jacobian: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else {
        value * jacobian
    }
}

/// Nested estimate of `∫_a^b dv ∫_a^v g(u, v) du`.
///
/// The inner integral runs at a tenth of the requested tolerance.
pub fn integrate_triangle<G>(g: G, domain: Interval, tol: &Tolerance) -> Result<QuadResult, QuadError>
where
    G: Fn(f64, f64) -> f64,
{
    integrate_triangle_with_breaks(g, domain, &[], tol)
}

/// [`integrate_triangle`] with known discontinuity locations. Both the outer
/// and the inner integral are split at every break inside the domain.
pub fn integrate_triangle_with_breaks<G>(
    g: G,
    domain: Interval,
    breaks: &[f64],
    tol: &Tolerance,
) -> Result<QuadResult, QuadError>
where
    G: Fn(f64, f64) -> f64,
{
    let mut g = |u: f64, v: f64| Ok(g(u, v));
    try_integrate_triangle(&mut g, domain, breaks, tol)
}

/// Fallible-integrand core of the triangle integrators. Errors raised by `g`
/// abort the integration and are returned unchanged.
pub(crate) fn try_integrate_triangle<G>(
    g: &mut G,
    domain: Interval,
    breaks: &[f64],
    tol: &Tolerance,
) -> Result<QuadResult, QuadError>
where
    G: FnMut(f64, f64) -> Result<f64, QuadError>,
{
    let budget = Budget::new(tol.max_evaluations);
    let inner_tol = tol.tightened(10.0);

    if domain.is_bounded() {
        let cuts = segment_points(domain.lower, domain.upper, breaks);
        nested(g, &cuts, tol, &inner_tol, &budget)
    } else {
        // A monotone map of both axes sends the triangle onto a triangle.
        let sub = transform_unbounded(domain)?;
        let m = sub.mapped();
        let mapped_breaks: Vec<f64> = breaks.iter().filter(|b| domain.contains(**b)).map(|&b| sub.inverse(b)).collect();
        let cuts = segment_points(m.lower, m.upper, &mapped_breaks);
        let mut h = |s: f64, t: f64| -> Result<f64, QuadError> {
            let value = g(sub.point(s), sub.point(t))?;
            Ok(weighted(value, sub.jacobian(s) * sub.jacobian(t)))
        };
        nested(&mut h, &cuts, tol, &inner_tol, &budget)
    }
}

fn segment_points(lower: f64, upper: f64, breaks: &[f64]) -> Vec<f64> {
    let mut cuts = vec![lower];
    let mut inside: Vec<f64> = breaks.iter().copied().filter(|b| *b > lower && *b < upper).collect();
    inside.sort_by(f64::total_cmp);
    inside.dedup();
    cuts.extend(inside);
    cuts.push(upper);
    cuts
}

fn nested<G>(g: &mut G, cuts: &[f64], tol: &Tolerance, inner_tol: &Tolerance, budget: &Budget) -> Result<QuadResult, QuadError>
where
    G: FnMut(f64, f64) -> Result<f64, QuadError>,
{
    let lower = cuts[0];
    let span = cuts[cuts.len() - 1] - lower;
    let mut inner_ok = true;
    // Largest inner error as a fraction of that inner integral's own target.
    let mut worst_ratio = 0.0f64;

    let mut outer = |v: f64| -> Result<f64, QuadError> {
        let mut sum = 0.0;
        let mut lo = lower;
        for &c in &cuts[1..] {
            let hi = c.min(v);
            if hi > lo {
                let mut inner = |u: f64| g(u, v);
                let r = adaptive(&mut inner, lo, hi, inner_tol, Level::Inner, budget)?;
                inner_ok &= r.converged;
                let target = inner_tol.abs.max(inner_tol.rel * r.value.abs());
                worst_ratio = worst_ratio.max(r.abs_error / target);
                sum += r.value;
            }
            if c >= v {
                break;
            }
            lo = c;
        }
        Ok(sum)
    };

    // Converged inner integrals contribute at most a tenth of the target;
    // the outer rule gets the remainder.
    let outer_tol = tol.tightened(10.0 / 9.0);
    let mut total = QuadResult::exact(0.0);
    for w in cuts.windows(2) {
        let start = budget.used();
        let r = adaptive(&mut outer, w[0], w[1], &outer_tol, Level::Outer, budget)?;
        total = total.combine(QuadResult {
            evaluations: budget.used() - start,
            ..r
        });
    }

    // Integrated inner error, taking |total| for ∫|inner|; exact when the
    // inner integral keeps one sign.
    let inner_error = worst_ratio * (inner_tol.abs * span + inner_tol.rel * total.value.abs());
    let abs_error = total.abs_error + inner_error;
    let converged = total.converged && inner_ok && tol.accepts(total.value, abs_error);
    Ok(QuadResult {
        abs_error,
        converged,
        ..total
    })
}
