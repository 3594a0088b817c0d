//! Expectations and distribution functions of `Y = g(min X_i, max X_i)` for
//! independent continuous random variables.
//!
//! For iid `X_i ~ F` the polyhedral split gives
//!
//! ```text
//! E[Y] = n(n-1) ∫ dF(v) ∫_{u<v} g(u, v) (F(v) - F(u))^{n-2} dF(u)
//! ```
//!
//! and for independent `X_i ~ F_i` the weight becomes
//! `Σ_{j≠k} dF_j(u) dF_k(v) Π_{i∉{j,k}} (F_i(v) - F_i(u))`.
//! CDFs must be continuous: atoms would put mass on the ties the split
//! ignores.

mod distribution;

use std::cell::{Cell, RefCell};

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

pub use distribution::{Distribution, DistributionSpec};

use crate::quadrature::{self, try_integrate_triangle, Interval, Level, QuadError, QuadResult, Tolerance};

/// Number of probes used to locate the cut of the Heaviside factor.
const CUT_PROBES: usize = 32;
const END_PROBE: f64 = 1e-10;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProbabilityError {
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-monotone CDF table: {0}")]
    NonMonotoneTable(String),
    #[error("distribution '{label}' has neither a density nor a quantile function")]
    NoIntegrationPath { label: String },
    #[error("need n >= 2 variables, got {n}")]
    TooFewVariables { n: usize },
    #[error("g({u}, {v}) = {value} is not finite")]
    NonFiniteFunctional { u: f64, v: f64, value: f64 },
}

impl ProbabilityError {
    /// The best estimate carried by a non-convergence error.
    pub fn best_estimate(&self) -> Option<QuadResult> {
        match self {
            ProbabilityError::Quad(QuadError::ToleranceNotReached { best }) => Some(*best),
            _ => None,
        }
    }
}

fn check_n(n: usize) -> Result<(), ProbabilityError> {
    if n < 2 {
        Err(ProbabilityError::TooFewVariables { n })
    } else {
        Ok(())
    }
}

// Scale a raw estimate, keeping the best value of a non-converged run.
fn finish(raw: Result<QuadResult, QuadError>, factor: f64) -> Result<QuadResult, ProbabilityError> {
    let r = raw.or_else(|e| match e {
        QuadError::ToleranceNotReached { best } => Ok(best),
        e => Err(e),
    })?;
    Ok(r.scaled(factor).into_checked()?)
}

fn powi(x: f64, k: usize) -> f64 {
    x.powi(k as i32)
}

/// `E[g(min X, max X)]` for `n` iid draws from `dist`.
///
/// Uses the density when there is one, otherwise the quantile substitution
/// `u = Q(p)`, `v = Q(q)` onto the unit triangle.
pub fn expect_minmax_iid<G>(g: G, dist: &Distribution, n: usize, tol: &Tolerance) -> Result<QuadResult, ProbabilityError>
where
    G: Fn(f64, f64) -> f64,
{
    check_n(n)?;
    let factor = (n * (n - 1)) as f64;
    let tol = tol.for_scaled(factor);
    if let Some(pdf) = dist.pdf_fn() {
        let mut h = |u: f64, v: f64| -> Result<f64, QuadError> {
            let w = pdf(u) * pdf(v);
            if w == 0.0 {
                return Ok(0.0);
            }
            Ok(g(u, v) * powi(dist.cdf(v) - dist.cdf(u), n - 2) * w)
        };
        finish(try_integrate_triangle(&mut h, dist.support(), dist.breaks(), &tol), factor)
    } else if let Some(q) = dist.quantile_fn() {
        let mut h = |p: f64, r: f64| -> Result<f64, QuadError> { Ok(g(q(p), q(r)) * powi(r - p, n - 2)) };
        finish(try_integrate_triangle(&mut h, Interval::unit(), &[], &tol), factor)
    } else {
        Err(ProbabilityError::NoIntegrationPath { label: dist.label().to_string() })
    }
}

/// `E[g(min X_i, max X_i)]` for independent `X_i ~ dists[i]`.
///
/// The sum over ordered pairs `(j, k)` is folded into a single triangle
/// integrand. Every distribution needs a density.
pub fn expect_minmax_hetero<G>(g: G, dists: &[Distribution], tol: &Tolerance) -> Result<QuadResult, ProbabilityError>
where
    G: Fn(f64, f64) -> f64,
{
    let n = dists.len();
    check_n(n)?;
    let mut pdfs = Vec::with_capacity(n);
    for d in dists {
        match d.pdf_fn() {
            Some(p) => pdfs.push(p),
            None => return Err(ProbabilityError::NoIntegrationPath { label: d.label().to_string() }),
        }
    }
    let lower = dists.iter().map(|d| d.support().lower()).fold(f64::INFINITY, f64::min);
    let upper = dists.iter().map(|d| d.support().upper()).fold(f64::NEG_INFINITY, f64::max);
    let hull = Interval::new(lower, upper)?;
    let mut breaks: Vec<f64> = Vec::new();
    for d in dists {
        let s = d.support();
        breaks.extend([s.lower(), s.upper()].into_iter().filter(|x| x.is_finite()));
        breaks.extend_from_slice(d.breaks());
    }

    let mut h = |u: f64, v: f64| -> Result<f64, QuadError> {
        let fu: Vec<f64> = pdfs.iter().map(|p| p(u)).collect();
        let fv: Vec<f64> = pdfs.iter().map(|p| p(v)).collect();
        if fu.iter().all(|x| *x == 0.0) || fv.iter().all(|x| *x == 0.0) {
            return Ok(0.0);
        }
        let mass: Vec<f64> = dists.iter().map(|d| d.cdf(v) - d.cdf(u)).collect();
        let mut weight = 0.0;
        for j in 0..n {
            if fu[j] == 0.0 {
                continue;
            }
            for k in 0..n {
                if k == j || fv[k] == 0.0 {
                    continue;
                }
                let rest: f64 = (0..n).filter(|&i| i != j && i != k).map(|i| mass[i]).product();
                weight += fu[j] * fv[k] * rest;
            }
        }
        if weight == 0.0 {
            return Ok(0.0);
        }
        Ok(g(u, v) * weight)
    };
    finish(try_integrate_triangle(&mut h, hull, &breaks, tol), 1.0)
}

/// `P[g(min X, max X) <= z]` for `n` iid draws from `dist`.
///
/// For each `v` the set of `u < v` with `g(u, v) <= z` is located by probing
/// and bisection, and the inner integral over it is done in closed form:
/// `∫_{u1}^{u2} (F(v)-F(u))^{n-2} dF(u) = [(F(v)-F(u1))^{n-1} - (F(v)-F(u2))^{n-1}] / (n-1)`.
/// A `g` that is monotone in `u` has at most one cut and the result is as
/// accurate as the outer quadrature. Otherwise cuts narrower than the probe
/// spacing can be missed; a warning is logged.
pub fn cdf_of_functional<G>(g: G, dist: &Distribution, n: usize, z: f64, tol: &Tolerance) -> Result<QuadResult, ProbabilityError>
where
    G: Fn(f64, f64) -> f64,
{
    check_n(n)?;
    if !(dist.has_pdf() || dist.has_quantile()) {
        return Err(ProbabilityError::NoIntegrationPath { label: dist.label().to_string() });
    }
    let failure: RefCell<Option<ProbabilityError>> = RefCell::new(None);
    let warned = Cell::new(false);
    let lower = dist.support().lower();

    let inner = |v: f64| -> f64 {
        if failure.borrow().is_some() {
            return 0.0;
        }
        match accepted_mass(&g, dist, lower, v, z, n) {
            Ok((mass, monotone)) => {
                if !monotone && !warned.replace(true) {
                    log::warn!("g is not monotone in u; the Heaviside cut is resolved by probing only (reduced accuracy)");
                }
                mass
            }
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                0.0
            }
        }
    };

    let factor = n as f64;
    let tol = tol.for_scaled(factor);
    let raw = if let Some(pdf) = dist.pdf_fn() {
        let mut segments = vec![dist.support().lower()];
        segments.extend(dist.breaks().iter().copied().filter(|b| dist.support().contains(*b)));
        segments.push(dist.support().upper());
        segments.dedup();
        integrate_pieces(|v| {
            let w = pdf(v);
            if w == 0.0 {
                0.0
            } else {
                inner(v) * w
            }
        }, &segments, &tol)
    } else {
        let q = dist.quantile_fn().expect("checked above");
        quadrature::integrate_1d(|p| inner(q(p)), Interval::unit(), &tol)
    };
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    finish(raw, factor)
}

fn integrate_pieces<F>(f: F, cuts: &[f64], tol: &Tolerance) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> f64,
{
    let mut total = QuadResult::exact(0.0);
    let mut best_only = false;
    for w in cuts.windows(2) {
        let piece = Interval::new(w[0], w[1])?;
        let r = match quadrature::integrate_1d(&f, piece, tol) {
            Ok(r) => r,
            Err(QuadError::ToleranceNotReached { best }) => {
                best_only = true;
                best
            }
            Err(e) => return Err(e),
        };
        total = total.combine(r);
    }
    if best_only {
        total.converged = false;
    }
    total.into_checked()
}

// Σ over accepted u-intervals of (F(v)-F(u1))^{n-1} - (F(v)-F(u2))^{n-1},
// plus whether at most one cut was found.
fn accepted_mass<G>(g: &G, dist: &Distribution, lower: f64, v: f64, z: f64, n: usize) -> Result<(f64, bool), ProbabilityError>
where
    G: Fn(f64, f64) -> f64,
{
    if !(v > lower) {
        return Ok((0.0, true));
    }
    // t in (0, 1) parametrises u in (lower, v).
    let u_at = |t: f64| -> f64 {
        if lower.is_finite() {
            lower + (v - lower) * t
        } else {
            v - (1.0 - t) / t
        }
    };
    let accepts = |t: f64| -> Result<bool, ProbabilityError> {
        let u = u_at(t);
        let value = g(u, v);
        if value.is_nan() {
            return Err(ProbabilityError::NonFiniteFunctional { u, v, value });
        }
        Ok(value <= z)
    };

    // Interior probes plus two hugging the ends, so that a cut close to
    // either end of (lower, v) is still bracketed.
    let mut probes = vec![END_PROBE];
    probes.extend((0..CUT_PROBES).map(|i| (i as f64 + 0.5) / CUT_PROBES as f64));
    probes.push(1.0 - END_PROBE);
    let flags: Vec<bool> = probes.iter().map(|&t| accepts(t)).collect::<Result<_, _>>()?;

    // Runs of constant acceptance in t, starting from t = 0.
    let mut state = flags[0];
    let mut segments = vec![(0.0, state)];
    for i in 1..probes.len() {
        if flags[i] != state {
            let cut = bisect(&accepts, probes[i - 1], probes[i], state, &u_at)?;
            state = flags[i];
            segments.push((cut, state));
        }
    }
    let monotone = segments.len() <= 2;

    let fv = dist.cdf(v);
    let tail = |t: f64| -> f64 {
        if t <= 0.0 {
            powi(fv - dist.cdf(lower.max(f64::MIN)), n - 1)
        } else if t >= 1.0 {
            0.0
        } else {
            powi(fv - dist.cdf(u_at(t)), n - 1)
        }
    };
    let mut mass = 0.0;
    for (i, &(start, ok)) in segments.iter().enumerate() {
        if !ok {
            continue;
        }
        let end = segments.get(i + 1).map_or(1.0, |s| s.0);
        mass += tail(start) - tail(end);
    }
    Ok((mass, monotone))
}

// Locate the flip of `accepts` between t0 (state `left`) and t1.
fn bisect<A, U>(accepts: &A, mut t0: f64, mut t1: f64, left: bool, u_at: &U) -> Result<f64, ProbabilityError>
where
    A: Fn(f64) -> Result<bool, ProbabilityError>,
    U: Fn(f64) -> f64,
{
    for _ in 0..200 {
        let (u0, u1) = (u_at(t0), u_at(t1));
        if (u1 - u0).abs() <= 1e-12 * u0.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (t0 + t1);
        if mid <= t0 || mid >= t1 {
            break;
        }
        if accepts(mid)? == left {
            t0 = mid;
        } else {
            t1 = mid;
        }
    }
    Ok(0.5 * (t0 + t1))
}

/// `E[g(min X, max X)]` for `n` iid exponential(`rate`) draws, through
/// `x = e^{-λu}`, `y = e^{-λu} - e^{-λv}`:
///
/// ```text
/// n(n-1) ∫_0^1 dx ∫_0^x y^{n-2} g(-ln(x)/λ, -ln(x-y)/λ) dy
/// ```
///
/// Logs a warning when `g` appears unbounded as `v → ∞`.
pub fn expect_minmax_exponential<G>(g: G, rate: f64, n: usize, tol: &Tolerance) -> Result<QuadResult, ProbabilityError>
where
    G: Fn(f64, f64) -> f64,
{
    check_n(n)?;
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(ProbabilityError::InvalidParameter(format!("rate must be positive, got {rate}")));
    }
    let u0 = std::f64::consts::LN_2 / rate;
    let near = g(u0, 6.0 * std::f64::consts::LN_10 / rate).abs();
    let far = g(u0, 12.0 * std::f64::consts::LN_10 / rate).abs();
    if far.is_finite() && near.is_finite() && far > 2.0 * near.max(1e-300) && far > 1.0 {
        log::warn!("g grows without bound as v → ∞; convergence of the exponential substitution is not assured");
    }

    let factor = (n * (n - 1)) as f64;
    let mut h = |y: f64, x: f64| -> Result<f64, QuadError> {
        let w = powi(y, n - 2);
        let u = -x.ln() / rate;
        let v = -(x - y).ln() / rate;
        let value = g(u, v);
        if !value.is_finite() {
            return Err(QuadError::NonFiniteEvaluation { at: y, value, level: Level::Inner });
        }
        Ok(if w == 0.0 { 0.0 } else { w * value })
    };
    finish(try_integrate_triangle(&mut h, Interval::unit(), &[], &tol.for_scaled(factor)), factor)
}

/// `E[((max - min)/max)^r]` for `n` iid uniform(0, 1) draws:
/// `(n-1)/(n+r-1)`.
pub fn relative_range_moment(n: usize, r: usize) -> Result<BigRational, ProbabilityError> {
    check_n(n)?;
    Ok(BigRational::new(BigInt::from(n - 1), BigInt::from(n + r - 1)))
}

/// `P[(max - min)/max <= z]` for `n` iid uniform(0, 1) draws.
pub fn relative_range_cdf(n: usize, z: f64) -> Result<f64, ProbabilityError> {
    check_n(n)?;
    Ok(if z <= 0.0 {
        0.0
    } else if z >= 1.0 {
        1.0
    } else {
        powi(z, n - 1)
    })
}

#[cfg(test)]
mod tests;
