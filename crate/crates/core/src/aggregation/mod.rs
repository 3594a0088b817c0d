//! Orness, andness and idempotency measures of aggregation functions on a
//! cube `[a, b]^n`.
//!
//! The averages are cube integrals of ratios involving `min x` and `max x`,
//! evaluated through [`crate::reduction`]. Closed forms for the Choquet
//! integral and the product are exact rationals.

mod functions;
mod set_function;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

pub use functions::{AggFn, ConjunctiveFunction, DisjunctiveFunction, InternalFunction, SPOT_CHECKS};
pub use set_function::{SetFunction, EXACT_MONOTONE_LIMIT, MAX_SET_SIZE};

use crate::quadrature::{self, Interval, QuadError, QuadResult, Tolerance};
use crate::reduction::{
    self, assemble_point, GeneralFullIntegrand, InnerStrategy, MinIntegrand, ReductionError, SymmetricFullIntegrand,
};

/// Ranges below this are treated as the diagonal of the cube.
pub const DIAGONAL_EPS: f64 = 1e-14;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AggregationError {
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("expected {expected} inputs, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid set function: {0}")]
    InvalidSetFunction(String),
    #[error("{label} is not {property}: F({point:?}) = {value}")]
    PropertyViolated { label: String, property: &'static str, point: Vec<f64>, value: f64 },
    #[error("input lies on the diagonal (max - min = {range:e})")]
    DiagonalInput { range: f64 },
    #[error("input lies on the domain boundary (distance {distance:e})")]
    BoundaryInput { distance: f64 },
    #[error("domain ({lower}, {upper}) must be bounded")]
    DomainUnbounded { lower: f64, upper: f64 },
    #[error("invalid dimension n = {n}: {reason}")]
    InvalidDimension { n: usize, reason: &'static str },
    #[error("{0}")]
    InvalidArgument(String),
}

impl AggregationError {
    /// The best estimate carried by a non-convergence error.
    pub fn best_estimate(&self) -> Option<QuadResult> {
        match self {
            AggregationError::Reduction(e) => e.best_estimate(),
            AggregationError::Quad(QuadError::ToleranceNotReached { best }) => Some(*best),
            _ => None,
        }
    }
}

fn bounded(domain: Interval) -> Result<(), AggregationError> {
    if domain.is_bounded() {
        Ok(())
    } else {
        Err(AggregationError::DomainUnbounded { lower: domain.lower(), upper: domain.upper() })
    }
}

fn check_len(n: usize, x: &[f64]) -> Result<(), AggregationError> {
    if x.len() != n {
        Err(AggregationError::DimensionMismatch { expected: n, got: x.len() })
    } else {
        Ok(())
    }
}

fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| (lo.min(t), hi.max(t)))
}

/// Discrete Choquet integral `Σ_S a(S) min_{i∈S} x_i`.
pub fn choquet_eval(a: &SetFunction, x: &[f64]) -> Result<f64, AggregationError> {
    check_len(a.n(), x)?;
    Ok(choquet_unchecked(a, x))
}

pub(crate) fn choquet_unchecked(a: &SetFunction, x: &[f64]) -> f64 {
    a.iter()
        .map(|(mask, w)| {
            let mut m = f64::INFINITY;
            let mut bits = mask;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                m = m.min(x[i]);
                bits &= bits - 1;
            }
            w * m
        })
        .sum()
}

// `(F(x), min x, max x)` away from the diagonal.
fn spread(f: &InternalFunction, x: &[f64]) -> Result<(f64, f64, f64), AggregationError> {
    check_len(f.n(), x)?;
    let (lo, hi) = min_max(x);
    let range = hi - lo;
    if !(range >= DIAGONAL_EPS) {
        return Err(AggregationError::DiagonalInput { range });
    }
    Ok((f.eval(x), lo, hi))
}

/// Orness distribution function `(F(x) - min x) / (max x - min x)`.
pub fn odf(f: &InternalFunction, x: &[f64]) -> Result<f64, AggregationError> {
    let (y, lo, hi) = spread(f, x)?;
    Ok((y - lo) / (hi - lo))
}

/// Andness distribution function `(max x - F(x)) / (max x - min x)`.
pub fn adf(f: &InternalFunction, x: &[f64]) -> Result<f64, AggregationError> {
    let (y, lo, hi) = spread(f, x)?;
    Ok((hi - y) / (hi - lo))
}

/// Which side of the cube an idempotency measure is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Conjunctive,
    Disjunctive,
}

/// A conjunctive or disjunctive function.
#[derive(Debug, Clone, Copy)]
pub enum Bounded<'a> {
    Conjunctive(&'a ConjunctiveFunction),
    Disjunctive(&'a DisjunctiveFunction),
}

impl Bounded<'_> {
    fn inner(&self) -> &AggFn {
        match self {
            Bounded::Conjunctive(f) => f.as_agg(),
            Bounded::Disjunctive(f) => f.as_agg(),
        }
    }

    pub fn kind(&self) -> Kind {
        match self {
            Bounded::Conjunctive(_) => Kind::Conjunctive,
            Bounded::Disjunctive(_) => Kind::Disjunctive,
        }
    }
}

impl<'a> From<&'a ConjunctiveFunction> for Bounded<'a> {
    fn from(f: &'a ConjunctiveFunction) -> Self {
        Bounded::Conjunctive(f)
    }
}

impl<'a> From<&'a DisjunctiveFunction> for Bounded<'a> {
    fn from(f: &'a DisjunctiveFunction) -> Self {
        Bounded::Disjunctive(f)
    }
}

/// Idempotency distribution function: `(F(x) - a) / (min x - a)` for a
/// conjunctive `F`, `(b - F(x)) / (b - max x)` for a disjunctive one.
pub fn idf<'a>(f: impl Into<Bounded<'a>>, x: &[f64], domain: Interval) -> Result<f64, AggregationError> {
    let f = f.into();
    let g = f.inner();
    check_len(g.n(), x)?;
    bounded(domain)?;
    let (lo, hi) = min_max(x);
    let (num, den) = match f.kind() {
        Kind::Conjunctive => (g.eval(x) - domain.lower(), lo - domain.lower()),
        Kind::Disjunctive => (domain.upper() - g.eval(x), domain.upper() - hi),
    };
    if !(den >= DIAGONAL_EPS) {
        return Err(AggregationError::BoundaryInput { distance: den });
    }
    Ok(num / den)
}

/// `(1/vol) Σ_{j≠k} ∫∫_{u<v} ∫_{(u,v)^{n-2}} ratio(F(x | x_j=u, x_k=v), u, v)`,
/// through the symmetric or the general full reduction.
fn full_average<R>(f: &AggFn, ratio: R, domain: Interval, tol: &Tolerance, strategy: &InnerStrategy) -> Result<QuadResult, AggregationError>
where
    R: Fn(f64, f64, f64) -> f64 + Sync,
{
    bounded(domain)?;
    let n = f.n();
    let volume = domain.width().powi(n as i32);
    let tol = tol.for_scaled(1.0 / volume);
    let r = if f.is_symmetric() {
        let integrand = SymmetricFullIntegrand::new(n, |free: &[f64], u: f64, v: f64| {
            let mut x = Vec::with_capacity(n);
            x.push(u);
            x.push(v);
            x.extend_from_slice(free);
            ratio(f.eval(&x), u, v)
        });
        reduction::integrate_minmax_full(&integrand, domain, &tol, strategy)
    } else {
        let integrand = GeneralFullIntegrand::new(n, |j: usize, k: usize, free: &[f64], u: f64, v: f64| {
            let mut x = vec![0.0; n];
            assemble_point(&mut x, &[(j, u), (k, v)], free);
            ratio(f.eval(&x), u, v)
        });
        reduction::integrate_minmax_general(&integrand, domain, &tol, strategy)
    };
    scale_result(r, 1.0 / volume)
}

fn scale_result(r: Result<QuadResult, ReductionError>, factor: f64) -> Result<QuadResult, AggregationError> {
    match r {
        Ok(r) => Ok(r.scaled(factor)),
        Err(e) => match e.best_estimate() {
            Some(best) => Err(AggregationError::Quad(QuadError::ToleranceNotReached { best: best.scaled(factor) })),
            None => Err(e.into()),
        },
    }
}

fn check_pair_dimension(n: usize) -> Result<(), AggregationError> {
    if n < 2 {
        Err(AggregationError::InvalidDimension { n, reason: "orness needs n >= 2" })
    } else {
        Ok(())
    }
}

/// Average of the orness distribution function over `domain^n`.
///
/// A [`InnerStrategy::ClosedKernel`] receives `(u, v)` and must return
/// `∫_{(u,v)^{n-2}} (F(x) - u)/(v - u)` with `x_j = u`, `x_k = v`.
pub fn orness_average_numeric(f: &InternalFunction, domain: Interval, tol: &Tolerance, strategy: &InnerStrategy) -> Result<QuadResult, AggregationError> {
    check_pair_dimension(f.n())?;
    full_average(f.as_agg(), |y, u, v| (y - u) / (v - u), domain, tol, strategy)
}

/// Average of the andness distribution function, integrated directly from
/// `(max x - F(x)) / (max x - min x)`; equals `1 - orness` up to quadrature
/// error.
pub fn andness_average_numeric(f: &InternalFunction, domain: Interval, tol: &Tolerance, strategy: &InnerStrategy) -> Result<QuadResult, AggregationError> {
    check_pair_dimension(f.n())?;
    full_average(f.as_agg(), |y, u, v| (v - y) / (v - u), domain, tol, strategy)
}

/// Mean of `F` over `domain^n`.
///
/// A [`InnerStrategy::ClosedKernel`] receives `(u, v)` and must return
/// `∫_{(u,v)^{n-2}} F(x)` with `x_j = u`, `x_k = v`.
pub fn mean_value(f: &AggFn, domain: Interval, tol: &Tolerance, strategy: &InnerStrategy) -> Result<QuadResult, AggregationError> {
    bounded(domain)?;
    if f.n() == 1 {
        let r = quadrature::integrate_1d(|x| f.eval(&[x]), domain, &tol.for_scaled(1.0 / domain.width()));
        return scale_result(r.map_err(ReductionError::from), 1.0 / domain.width());
    }
    full_average(f, |y, _, _| y, domain, tol, strategy)
}

/// Global orness `(F̄ - Min̄) / (Max̄ - Min̄)` with `Min̄ = a + (b-a)/(n+1)`
/// and `Max̄ = a + n(b-a)/(n+1)`. Strategy as for [`mean_value`].
pub fn global_orness(f: &InternalFunction, domain: Interval, tol: &Tolerance, strategy: &InnerStrategy) -> Result<QuadResult, AggregationError> {
    let n = f.n();
    check_pair_dimension(n)?;
    bounded(domain)?;
    let width = domain.width();
    let spread = width * (n - 1) as f64 / (n + 1) as f64;
    let min_bar = domain.lower() + width / (n + 1) as f64;
    let mean = mean_value(f.as_agg(), domain, &tol.for_scaled(1.0 / spread), strategy)?;
    Ok(QuadResult {
        value: (mean.value - min_bar) / spread,
        abs_error: mean.abs_error / spread,
        ..mean
    })
}

/// Average of the idempotency distribution function over `domain^n`, through
/// the one-sided split on the index of the minimum (conjunctive) or the
/// maximum (disjunctive).
///
/// A [`InnerStrategy::ClosedKernel`] receives the inner cube's corners
/// (`(u, b)` resp. `(a, v)`) and must return the inner integral of the idf.
pub fn idempotency_average_numeric<'a>(
    f: impl Into<Bounded<'a>>,
    domain: Interval,
    tol: &Tolerance,
    strategy: &InnerStrategy,
) -> Result<QuadResult, AggregationError> {
    let f = f.into();
    bounded(domain)?;
    let g = f.inner();
    let n = g.n();
    let (a, b) = (domain.lower(), domain.upper());
    let volume = domain.width().powi(n as i32);
    let kind = f.kind();
    let ratio = move |y: f64, t: f64| match kind {
        Kind::Conjunctive => (y - a) / (t - a),
        Kind::Disjunctive => (b - y) / (b - t),
    };
    let tol = tol.for_scaled(1.0 / volume);
    let r = if g.is_symmetric() {
        let integrand = reduction::symmetric_one_sided(n, |free: &[f64], t: f64| {
            let mut x = Vec::with_capacity(n);
            x.push(t);
            x.extend_from_slice(free);
            ratio(g.eval(&x), t)
        });
        one_sided(kind, &integrand, domain, &tol, strategy)
    } else {
        let integrand = MinIntegrand::general(n, |j: usize, free: &[f64], t: f64| {
            let mut x = vec![0.0; n];
            assemble_point(&mut x, &[(j, t)], free);
            ratio(g.eval(&x), t)
        });
        one_sided(kind, &integrand, domain, &tol, strategy)
    };
    scale_result(r, 1.0 / volume)
}

fn one_sided<F>(kind: Kind, f: &MinIntegrand<F>, domain: Interval, tol: &Tolerance, strategy: &InnerStrategy) -> Result<QuadResult, ReductionError>
where
    F: Fn(usize, &[f64], f64) -> f64 + Sync,
{
    match kind {
        Kind::Conjunctive => reduction::integrate_min(f, domain, tol, strategy),
        Kind::Disjunctive => reduction::integrate_max(f, domain, tol, strategy),
    }
}

/// Global idempotency `(F̄ - a)/(Min̄ - a)` (conjunctive) or
/// `(b - F̄)/(b - Max̄)` (disjunctive). Strategy as for [`mean_value`].
pub fn global_idempotency<'a>(
    f: impl Into<Bounded<'a>>,
    domain: Interval,
    tol: &Tolerance,
    strategy: &InnerStrategy,
) -> Result<QuadResult, AggregationError> {
    let f = f.into();
    bounded(domain)?;
    let n = f.inner().n();
    let scale = domain.width() / (n + 1) as f64;
    let mean = mean_value(f.inner(), domain, &tol.for_scaled(1.0 / scale), strategy)?;
    let value = match f.kind() {
        Kind::Conjunctive => (mean.value - domain.lower()) / scale,
        Kind::Disjunctive => (domain.upper() - mean.value) / scale,
    };
    Ok(QuadResult {
        value,
        abs_error: mean.abs_error / scale,
        ..mean
    })
}

fn rational(p: usize, q: usize) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn check_set_function_n(a: &SetFunction) -> Result<usize, AggregationError> {
    let n = a.n();
    if n < 2 {
        Err(AggregationError::InvalidDimension { n, reason: "orness needs n >= 2" })
    } else {
        Ok(n)
    }
}

/// Orness average of the Choquet integral,
/// `(1/(n-1)) Σ_S a(S) (n - s)/(s + 1)`; for `n = 2` simply
/// `(a({1}) + a({2}))/2`. Exact in the rationalized weights of
/// [`SetFunction::exact_weights`].
pub fn orness_average_choquet(a: &SetFunction) -> Result<BigRational, AggregationError> {
    let n = check_set_function_n(a)?;
    let weights = a.exact_weights();
    if n == 2 {
        let singles = weights.iter().filter(|(m, _)| m.count_ones() == 1).fold(BigRational::zero(), |acc, (_, w)| acc + w);
        return Ok(singles / BigRational::from_integer(BigInt::from(2)));
    }
    let sum = weights.iter().fold(BigRational::zero(), |acc, (m, w)| {
        let s = m.count_ones() as usize;
        acc + w * rational(n - s, s + 1)
    });
    Ok(sum / BigRational::from_integer(BigInt::from(n - 1)))
}

/// Global orness of the Choquet integral from its mean value
/// `Σ_S a(S)/(s + 1)`: `-1/(n-1) + (n+1)/(n-1) Σ_S a(S)/(s+1)`. Coincides
/// exactly with [`orness_average_choquet`].
pub fn global_orness_choquet(a: &SetFunction) -> Result<BigRational, AggregationError> {
    let n = check_set_function_n(a)?;
    let mean = a
        .exact_weights()
        .iter()
        .fold(BigRational::zero(), |acc, (m, w)| acc + w * rational(1, m.count_ones() as usize + 1));
    Ok(rational(n + 1, n - 1) * mean - rational(1, n - 1))
}

/// Orness average of the geometric mean on `[0, 1]^n`: `ln 4 - 1` for
/// `n = 2`, and for `n >= 3`
/// `n(n-1)(n/(n+1))^{n-2} ∫_0^1 x^n (1-x^{n+1})^{n-2}/(1-x^n) dx - 1/(n-2)`.
pub fn orness_average_geometric(n: usize) -> Result<f64, AggregationError> {
    if n < 2 {
        return Err(AggregationError::InvalidDimension { n, reason: "orness needs n >= 2" });
    }
    if n == 2 {
        return Ok(4f64.ln() - 1.0);
    }
    let k = n as f64;
    // 1 - x^m through expm1 keeps the ratio accurate near x = 1.
    let one_minus_pow = |x: f64, m: f64| -(m * x.ln()).exp_m1();
    let integrand = |x: f64| x.powi(n as i32) * one_minus_pow(x, k + 1.0).powi(n as i32 - 2) / one_minus_pow(x, k);
    let tol = Tolerance::new(1e-13, 1e-15, 1_000_000)?;
    let r = quadrature::integrate_1d(integrand, Interval::unit(), &tol)?;
    let factor = k * (k - 1.0) * (k / (k + 1.0)).powi(n as i32 - 2);
    Ok(factor * r.value - 1.0 / (k - 2.0))
}

/// Global orness of the geometric mean on `[0, 1]^n`:
/// `-1/(n-1) + (n+1)/(n-1) (n/(n+1))^n`.
pub fn global_orness_geometric(n: usize) -> Result<f64, AggregationError> {
    if n < 2 {
        return Err(AggregationError::InvalidDimension { n, reason: "orness needs n >= 2" });
    }
    let k = n as f64;
    Ok(-1.0 / (k - 1.0) + (k + 1.0) / (k - 1.0) * (k / (k + 1.0)).powi(n as i32))
}

/// Idempotency average of the product on `[0, 1]^n`: `2^{n-1} / C(2n-1, n)`.
pub fn idempotency_average_product(n: usize) -> Result<BigRational, AggregationError> {
    if n == 0 {
        return Err(AggregationError::InvalidDimension { n, reason: "need n >= 1" });
    }
    let mut binom = BigInt::one();
    for i in 0..n {
        binom = binom * BigInt::from(2 * n - 1 - i) / BigInt::from(i + 1);
    }
    Ok(BigRational::new(BigInt::one() << (n - 1), binom))
}

/// Global idempotency of the product on `[0, 1]^n`: `(n + 1)/2^n`.
pub fn global_idempotency_product(n: usize) -> Result<BigRational, AggregationError> {
    if n == 0 {
        return Err(AggregationError::InvalidDimension { n, reason: "need n >= 1" });
    }
    Ok(BigRational::new(BigInt::from(n + 1), BigInt::one() << n))
}

/// Closed inner integral for the product's idempotency average: for the
/// one-sided split on the minimum `u` with `m = n - 1` free coordinates in
/// `(u, hi)`, `∫ (u Π x_i - a)/(u - a) = (u P - a W)/(u - a)` with
/// `P = ((hi² - u²)/2)^m` and `W = (hi - u)^m`.
pub fn product_idf_kernel(n: usize, domain: Interval) -> InnerStrategy {
    let a = domain.lower();
    let m = n.saturating_sub(1) as i32;
    InnerStrategy::closed_kernel(move |u: f64, hi: f64| {
        let p = ((hi * hi - u * u) / 2.0).powi(m);
        let w = (hi - u).powi(m);
        (u * p - a * w) / (u - a)
    })
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `p/q`, or just `p` for integers.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests;
