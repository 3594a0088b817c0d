//! Maps from infinite intervals onto finite ones.

use super::{Interval, QuadError};

/// How an infinite endpoint is brought to a finite one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnboundedMap {
    /// `x = t / (1 - t)` and its reflections; algebraic decay in `t`.
    #[default]
    Rational,
    /// `x = -ln(1 - t)` and the logistic map; suited to heavy tails.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    Upper(f64),
    Lower(f64),
    Both,
}

/// An increasing substitution `x = φ(t)` from a finite interval onto an
/// unbounded one, so that `∫ f(x) dx = ∫ f(φ(t)) φ'(t) dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Substitution {
    shape: Shape,
    map: UnboundedMap,
    mapped: Interval,
}

impl Substitution {
    pub fn mapped(&self) -> Interval {
        self.mapped
    }

    pub fn map(&self) -> UnboundedMap {
        self.map
    }

    /// `φ(t)`.
    pub fn point(&self, t: f64) -> f64 {
        match (self.map, self.shape) {
            (UnboundedMap::Rational, Shape::Upper(a)) => a + t / (1.0 - t),
            (UnboundedMap::Rational, Shape::Lower(b)) => b - (1.0 - t) / t,
            (UnboundedMap::Rational, Shape::Both) => t / (1.0 - t * t),
            (UnboundedMap::Exponential, Shape::Upper(a)) => a - (-t).ln_1p(),
            (UnboundedMap::Exponential, Shape::Lower(b)) => b + t.ln(),
            (UnboundedMap::Exponential, Shape::Both) => (t / (1.0 - t)).ln(),
        }
    }

    /// `φ'(t)`.
    pub fn jacobian(&self, t: f64) -> f64 {
        match (self.map, self.shape) {
            (UnboundedMap::Rational, Shape::Upper(_)) => 1.0 / ((1.0 - t) * (1.0 - t)),
            (UnboundedMap::Rational, Shape::Lower(_)) => 1.0 / (t * t),
            (UnboundedMap::Rational, Shape::Both) => {
                let d = 1.0 - t * t;
                (1.0 + t * t) / (d * d)
            }
            (UnboundedMap::Exponential, Shape::Upper(_)) => 1.0 / (1.0 - t),
            (UnboundedMap::Exponential, Shape::Lower(_)) => 1.0 / t,
            (UnboundedMap::Exponential, Shape::Both) => 1.0 / (t * (1.0 - t)),
        }
    }

    /// `φ⁻¹(x)`.
    pub fn inverse(&self, x: f64) -> f64 {
        match (self.map, self.shape) {
            (UnboundedMap::Rational, Shape::Upper(a)) => {
                let d = x - a;
                d / (1.0 + d)
            }
            (UnboundedMap::Rational, Shape::Lower(b)) => 1.0 / (1.0 + (b - x)),
            (UnboundedMap::Rational, Shape::Both) => 2.0 * x / (1.0 + (1.0 + 4.0 * x * x).sqrt()),
            (UnboundedMap::Exponential, Shape::Upper(a)) => -(-(x - a)).exp_m1(),
            (UnboundedMap::Exponential, Shape::Lower(b)) => (x - b).exp(),
            (UnboundedMap::Exponential, Shape::Both) => 1.0 / (1.0 + (-x).exp()),
        }
    }
}

/// Rational substitution for an unbounded `domain`: `[a, ∞) → (0, 1)` via
/// `x = a + t/(1-t)`, `(-∞, ∞) → (-1, 1)` via `x = t/(1-t²)`.
pub fn transform_unbounded(domain: Interval) -> Result<Substitution, QuadError> {
    transform_unbounded_with(domain, UnboundedMap::Rational)
}

pub fn transform_unbounded_with(domain: Interval, map: UnboundedMap) -> Result<Substitution, QuadError> {
    let (lo, hi) = (domain.lower(), domain.upper());
    let shape = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => return Err(QuadError::AlreadyBounded { lower: lo, upper: hi }),
        (true, false) => Shape::Upper(lo),
        (false, true) => Shape::Lower(hi),
        (false, false) => Shape::Both,
    };
    let mapped = match (map, shape) {
        (UnboundedMap::Rational, Shape::Both) => Interval::new(-1.0, 1.0)?,
        _ => Interval::unit(),
    };
    Ok(Substitution { shape, map, mapped })
}
