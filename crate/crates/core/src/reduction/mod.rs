//! Integrals over a cube whose integrand depends on the minimum and/or the
//! maximum of the coordinates.
//!
//! The cube `(a, b)^n` splits into `n` open polyhedra
//! `P_j = {x : x_i > x_j for all i != j}`, up to a null set. On `P_j` the
//! minimum is just `x_j`, so
//!
//! ```text
//! ∫ f(x, min x) dx = Σ_j ∫_a^b du ∫_{(u,b)^{n-1}} f(x, u | x_j = u) Π_{i≠j} dx_i
//! ```
//!
//! and likewise for the maximum with inner cube `(a, v)^{n-1}`. Applying the
//! split twice handles integrands depending on both, with an outer integral
//! over the triangle `a < u < v < b` and an inner one over `(u, v)^{n-2}`.
//! When the integrand depends only on `(min, max)` the inner integral is
//! `(v - u)^{n-2}` and everything collapses to a 2-D integral.
//!
//! Indices `j`, `k` are 0-based throughout. `free` slices always list the
//! remaining coordinates in ascending index order.

mod inner;

use rayon::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use inner::{InnerKernel, InnerStrategy, MAX_GRID_DIMENSION};

use crate::quadrature::{self, adaptive, Budget, Interval, Level, QuadError, QuadResult, Tolerance};
use inner::CubeRule;

/// Largest `n` accepted by the reduction routines.
pub const MAX_DIMENSION: usize = 64;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ReductionError {
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("domain ({lower}, {upper}) must be bounded")]
    DomainUnbounded { lower: f64, upper: f64 },
    #[error("invalid dimension n = {n}: {reason}")]
    InvalidDimension { n: usize, reason: &'static str },
    #[error("subset size {s} outside 1..={n}")]
    InvalidSubsetSize { s: usize, n: usize },
    #[error("inner strategy unavailable: {0}")]
    StrategyUnavailable(String),
    #[error("integrand declared symmetric but changes under permutation of its free coordinates (|Δ| = {gap:e})")]
    NotSymmetric { gap: f64 },
}

impl ReductionError {
    /// The best estimate carried by a non-convergence error.
    pub fn best_estimate(&self) -> Option<QuadResult> {
        match self {
            ReductionError::Quad(QuadError::ToleranceNotReached { best }) => Some(*best),
            _ => None,
        }
    }
}

/// `f(x, min x)` in Lemma form: `eval(j, free, u)` is `f` at the point with
/// `x_j = u` and the other coordinates taken from `free` (length `n - 1`).
pub struct MinIntegrand<F> {
    pub n: usize,
    pub symmetric: bool,
    pub eval: F,
}

/// Mirror of [`MinIntegrand`]: `eval(j, free, v)` with `x_j = v` the maximum.
pub type MaxIntegrand<F> = MinIntegrand<F>;

impl<F> MinIntegrand<F>
where
    F: Fn(usize, &[f64], f64) -> f64 + Sync,
{
    pub fn general(n: usize, eval: F) -> Self {
        Self { n, symmetric: false, eval }
    }
}

/// Integrand invariant under every permutation of the coordinates; `j` is
/// never consulted.
pub fn symmetric_one_sided<G>(n: usize, eval: G) -> MinIntegrand<impl Fn(usize, &[f64], f64) -> f64 + Sync>
where
    G: Fn(&[f64], f64) -> f64 + Sync,
{
    MinIntegrand {
        n,
        symmetric: true,
        eval: move |_j: usize, free: &[f64], u: f64| eval(free, u),
    }
}

/// `f(x, min, max)` for a symmetric `f`: `eval(free, u, v)` with `free` of
/// length `n - 2`.
pub struct SymmetricFullIntegrand<F> {
    pub n: usize,
    pub eval: F,
}

impl<F> SymmetricFullIntegrand<F>
where
    F: Fn(&[f64], f64, f64) -> f64 + Sync,
{
    pub fn new(n: usize, eval: F) -> Self {
        Self { n, eval }
    }

    /// Spot-check the declared symmetry: 10 random permutations of `free`
    /// at 100 random points of the open triangle.
    pub fn check_symmetry(&self, domain: Interval) -> Result<(), ReductionError> {
        let m = self.n.saturating_sub(2);
        if m < 2 {
            return Ok(());
        }
        check_free_symmetry(m, domain, |free, u, v| (self.eval)(free, u, v))
    }
}

/// `f(x, min, max)` with the full pair structure: `eval(j, k, free, u, v)`
/// is `f` at `x_j = u`, `x_k = v`, remaining coordinates from `free`.
pub struct GeneralFullIntegrand<F> {
    pub n: usize,
    pub eval: F,
}

impl<F> GeneralFullIntegrand<F>
where
    F: Fn(usize, usize, &[f64], f64, f64) -> f64 + Sync,
{
    pub fn new(n: usize, eval: F) -> Self {
        Self { n, eval }
    }
}

/// Write the point with the `fixed` (index, value) slots set and the free
/// coordinates, in ascending index order, everywhere else.
pub fn assemble_point(out: &mut [f64], fixed: &[(usize, f64)], free: &[f64]) {
    let mut rest = free.iter();
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = match fixed.iter().find(|(idx, _)| *idx == i) {
            Some(&(_, value)) => value,
            None => *rest.next().expect("free has too few coordinates"),
        };
    }
}

/// Unbiased sample variance `s²`.
pub fn sample_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|xi| (xi - mean) * (xi - mean)).sum::<f64>() / (n - 1.0)
}

/// `(v - u)^k` for `v > u`; large exponents go through logarithms.
pub(crate) fn diff_power(d: f64, k: usize) -> f64 {
    match k {
        0 => 1.0,
        1..=30 => d.powi(k as i32),
        _ => (k as f64 * d.ln()).exp(),
    }
}

fn check_dimension(n: usize, min: usize) -> Result<(), ReductionError> {
    if n < min {
        return Err(ReductionError::InvalidDimension {
            n,
            reason: if min == 2 { "need n >= 2" } else { "need n >= 1" },
        });
    }
    if n > MAX_DIMENSION {
        return Err(ReductionError::InvalidDimension { n, reason: "need n <= 64" });
    }
    Ok(())
}

fn bounded(domain: Interval) -> Result<(), ReductionError> {
    if domain.is_bounded() {
        Ok(())
    } else {
        Err(ReductionError::DomainUnbounded {
            lower: domain.lower(),
            upper: domain.upper(),
        })
    }
}

fn check_free_symmetry<E>(m: usize, domain: Interval, eval: E) -> Result<(), ReductionError>
where
    E: Fn(&[f64], f64, f64) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_5e7);
    let (a, w) = (domain.lower(), domain.width());
    let mut free = vec![0.0; m];
    let mut shuffled = vec![0.0; m];
    for _ in 0..100 {
        let (mut u, mut v) = (a + w * rng.random::<f64>(), a + w * rng.random::<f64>());
        if u > v {
            std::mem::swap(&mut u, &mut v);
        }
        for x in free.iter_mut() {
            *x = u + (v - u) * rng.random::<f64>();
        }
        let base = eval(&free, u, v);
        for _ in 0..10 {
            shuffled.copy_from_slice(&free);
            // Fisher–Yates
            for i in (1..m).rev() {
                let j = rng.random_range(0..=i);
                shuffled.swap(i, j);
            }
            let other = eval(&shuffled, u, v);
            let gap = (other - base).abs();
            if gap > 1e-12 * base.abs().max(1.0) {
                return Err(ReductionError::NotSymmetric { gap });
            }
        }
    }
    Ok(())
}

enum Inner<'s> {
    Closed(&'s InnerKernel),
    Rule(&'s CubeRule),
}

impl Inner<'_> {
    fn evaluations_per_call(&self) -> usize {
        match self {
            Inner::Closed(_) => 1,
            Inner::Rule(r) => r.evaluations_per_call(),
        }
    }
}

/// Run `outer` once per inner rule and merge. Monte Carlo batches give a
/// standard error across batches; deterministic strategies run once.
fn with_strategy<R>(strategy: &InnerStrategy, dim: usize, symmetric: bool, outer: R) -> Result<QuadResult, ReductionError>
where
    R: Fn(Inner<'_>) -> Result<QuadResult, ReductionError> + Sync,
{
    match strategy {
        InnerStrategy::ClosedKernel(kernel) => {
            if !symmetric {
                return Err(ReductionError::StrategyUnavailable(
                    "a closed inner kernel needs a symmetric integrand".into(),
                ));
            }
            outer(Inner::Closed(kernel))
        }
        InnerStrategy::TensorGrid { points_per_axis } => {
            let rule = CubeRule::order_cell(dim, *points_per_axis, symmetric)?;
            outer(Inner::Rule(&rule))
        }
        InnerStrategy::MonteCarlo { samples, seed } => {
            if dim == 0 {
                let rule = CubeRule::order_cell(0, 1, true)?;
                return outer(Inner::Rule(&rule));
            }
            let batches = CubeRule::monte_carlo_batches(dim, *samples, *seed)?;
            let results: Vec<Result<QuadResult, ReductionError>> =
                batches.par_iter().map(|rule| outer(Inner::Rule(rule))).collect();
            let results: Vec<QuadResult> = results.into_iter().collect::<Result<_, _>>()?;
            Ok(batch_mean(&results))
        }
    }
}

fn batch_mean(results: &[QuadResult]) -> QuadResult {
    let k = results.len() as f64;
    let mean = results.iter().map(|r| r.value).sum::<f64>() / k;
    let var = if results.len() > 1 {
        results.iter().map(|r| (r.value - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    QuadResult {
        value: mean,
        abs_error: (var / k).sqrt(),
        evaluations: results.iter().map(|r| r.evaluations).sum(),
        converged: results.iter().all(|r| r.converged),
        stochastic: true,
    }
}

fn outer_1d<G>(g: G, domain: Interval, tol: &Tolerance) -> Result<QuadResult, QuadError>
where
    G: Fn(f64) -> f64,
{
    let budget = Budget::new(tol.max_evaluations);
    let mut h = |x: f64| Ok(g(x));
    adaptive(&mut h, domain.lower(), domain.upper(), tol, Level::Single, &budget)
}

/// `∫_{(a,b)^n} f(min x, max x) dx = n(n-1) ∫_a^b dv ∫_a^v f(u,v) (v-u)^{n-2} du`.
pub fn integrate_minmax_pair<K>(kernel: K, n: usize, domain: Interval, tol: &Tolerance) -> Result<QuadResult, ReductionError>
where
    K: Fn(f64, f64) -> f64,
{
    check_dimension(n, 2)?;
    bounded(domain)?;
    let factor = (n * (n - 1)) as f64;
    let weight = |u: f64, v: f64| kernel(u, v) * diff_power(v - u, n - 2);
    let r = quadrature::integrate_triangle(weight, domain, &tol.for_scaled(factor))
        .or_else(|e| match e {
            QuadError::ToleranceNotReached { best } => Ok(best),
            e => Err(e),
        })?;
    Ok(r.scaled(factor).into_checked()?)
}

fn one_sided<F>(
    f: &MinIntegrand<F>,
    domain: Interval,
    tol: &Tolerance,
    strategy: &InnerStrategy,
    side: Side,
) -> Result<QuadResult, ReductionError>
where
    F: Fn(usize, &[f64], f64) -> f64 + Sync,
{
    check_dimension(f.n, 1)?;
    bounded(domain)?;
    let n = f.n;
    let m = n - 1;
    let (a, b) = (domain.lower(), domain.upper());
    let indices: Vec<usize> = if f.symmetric { vec![0] } else { (0..n).collect() };
    let multiplier = if f.symmetric { n as f64 } else { 1.0 };
    if f.symmetric && m >= 2 {
        check_free_symmetry(m, domain, |free, u, _| (f.eval)(0, free, u))?;
    }
    let per_term_tol = tol.for_scaled(n as f64);

    let result = with_strategy(strategy, m, f.symmetric, |inner| {
        let mut total = QuadResult::exact(0.0);
        for &j in &indices {
            let r = outer_1d(
                |t| {
                    let (lo, hi) = match side {
                        Side::Min => (t, b),
                        Side::Max => (a, t),
                    };
                    match &inner {
                        Inner::Closed(k) => k(lo, hi),
                        Inner::Rule(rule) => {
                            let mut free = vec![0.0; m];
                            rule.integrate(lo, hi, &mut free, |x| (f.eval)(j, x, t))
                        }
                    }
                },
                domain,
                &per_term_tol.for_scaled(multiplier),
            )?;
            let r = QuadResult {
                evaluations: r.evaluations * inner.evaluations_per_call(),
                ..r
            };
            total = total.combine(r);
        }
        Ok(total)
    })?;
    Ok(result.scaled(multiplier).into_checked()?)
}

#[derive(Debug, Clone, Copy)]
enum Side {
    Min,
    Max,
}

/// `∫_{(a,b)^n} f(x, min x) dx` via the polyhedral split on the index of the
/// minimum. A symmetric integrand collapses the sum over `j` to a factor `n`.
pub fn integrate_min<F>(f: &MinIntegrand<F>, domain: Interval, tol: &Tolerance, strategy: &InnerStrategy) -> Result<QuadResult, ReductionError>
where
    F: Fn(usize, &[f64], f64) -> f64 + Sync,
{
    one_sided(f, domain, tol, strategy, Side::Min)
}

/// `∫_{(a,b)^n} f(x, max x) dx`; inner cube `(a, v)^{n-1}`.
pub fn integrate_max<F>(f: &MaxIntegrand<F>, domain: Interval, tol: &Tolerance, strategy: &InnerStrategy) -> Result<QuadResult, ReductionError>
where
    F: Fn(usize, &[f64], f64) -> f64 + Sync,
{
    one_sided(f, domain, tol, strategy, Side::Max)
}

/// Triangle integral of `inner(u, v)` where `inner` integrates the free
/// coordinates over `(u, v)^m` with the given rule.
fn triangle_term<E>(inner: &Inner<'_>, m: usize, domain: Interval, tol: &Tolerance, eval: E) -> Result<QuadResult, ReductionError>
where
    E: Fn(&[f64], f64, f64) -> f64,
{
    let mut free = vec![0.0; m];
    let mut g = |u: f64, v: f64| -> Result<f64, QuadError> {
        Ok(match inner {
            Inner::Closed(k) => k(u, v),
            Inner::Rule(rule) => rule.integrate(u, v, &mut free, |x| eval(x, u, v)),
        })
    };
    let r = quadrature::try_integrate_triangle(&mut g, domain, &[], tol)?;
    Ok(QuadResult {
        evaluations: r.evaluations * inner.evaluations_per_call(),
        ..r
    })
}

/// `∫_{(a,b)^n} f(x, min x, max x) dx` for an integrand symmetric in its
/// coordinates: `n(n-1) ∫_a^b dv ∫_a^v du ∫_{(u,v)^{n-2}} f(free, u, v)`.
///
/// For `n = 2` the inner integral is zero-dimensional and is the integrand
/// evaluated with an empty `free`.
pub fn integrate_minmax_full<F>(
    f: &SymmetricFullIntegrand<F>,
    domain: Interval,
    tol: &Tolerance,
    strategy: &InnerStrategy,
) -> Result<QuadResult, ReductionError>
where
    F: Fn(&[f64], f64, f64) -> f64 + Sync,
{
    check_dimension(f.n, 2)?;
    bounded(domain)?;
    f.check_symmetry(domain)?;
    let m = f.n - 2;
    let factor = (f.n * (f.n - 1)) as f64;
    let r = with_strategy(strategy, m, true, |inner| {
        triangle_term(&inner, m, domain, &tol.for_scaled(factor), |x, u, v| (f.eval)(x, u, v)).or_else(keep_best)
    })?;
    Ok(r.scaled(factor).into_checked()?)
}

fn keep_best(e: ReductionError) -> Result<QuadResult, ReductionError> {
    match e.best_estimate() {
        Some(best) => Ok(best),
        None => Err(e),
    }
}

/// One ordered-pair term `∫_a^b dv ∫_a^v du ∫_{(u,v)^{n-2}} f(j, k, free, u, v)`.
pub fn integrate_minmax_term<F>(
    f: &GeneralFullIntegrand<F>,
    j: usize,
    k: usize,
    domain: Interval,
    tol: &Tolerance,
    strategy: &InnerStrategy,
) -> Result<QuadResult, ReductionError>
where
    F: Fn(usize, usize, &[f64], f64, f64) -> f64 + Sync,
{
    check_dimension(f.n, 2)?;
    bounded(domain)?;
    if j == k || j >= f.n || k >= f.n {
        return Err(ReductionError::InvalidDimension {
            n: f.n,
            reason: "pair indices must be distinct and below n",
        });
    }
    let m = f.n - 2;
    let r = with_strategy(strategy, m, false, |inner| {
        triangle_term(&inner, m, domain, tol, |x, u, v| (f.eval)(j, k, x, u, v)).or_else(keep_best)
    })?;
    Ok(r.into_checked()?)
}

/// Full sum over the `n(n-1)` ordered pairs `(j, k)`, `j` holding the
/// minimum and `k` the maximum. Terms are computed in parallel and summed in
/// lexicographic order.
pub fn integrate_minmax_general<F>(
    f: &GeneralFullIntegrand<F>,
    domain: Interval,
    tol: &Tolerance,
    strategy: &InnerStrategy,
) -> Result<QuadResult, ReductionError>
where
    F: Fn(usize, usize, &[f64], f64, f64) -> f64 + Sync,
{
    check_dimension(f.n, 2)?;
    bounded(domain)?;
    let n = f.n;
    let m = n - 2;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..n).filter(move |&k| k != j).map(move |k| (j, k))).collect();
    let term_tol = tol.for_scaled(pairs.len() as f64);

    let r = with_strategy(strategy, m, false, |inner| {
        let terms: Vec<Result<QuadResult, ReductionError>> = pairs
            .par_iter()
            .map(|&(j, k)| triangle_term(&inner, m, domain, &term_tol, |x, u, v| (f.eval)(j, k, x, u, v)).or_else(keep_best))
            .collect();
        let mut total = QuadResult::exact(0.0);
        for t in terms {
            total = total.combine(t?);
        }
        Ok(total)
    })?;
    Ok(r.into_checked()?)
}

/// `∫_{(a,b)^n} h(min_{i∈S} x_i) dx = (b-a)^{n-s} s ∫_a^b h(u) (b-u)^{s-1} du`
/// for any index set `S` of size `s`.
pub fn min_subset_integral<H>(h: H, n: usize, s: usize, domain: Interval, tol: &Tolerance) -> Result<QuadResult, ReductionError>
where
    H: Fn(f64) -> f64,
{
    check_dimension(n, 1)?;
    bounded(domain)?;
    if s == 0 || s > n {
        return Err(ReductionError::InvalidSubsetSize { s, n });
    }
    let (a, b) = (domain.lower(), domain.upper());
    let factor = (b - a).powi((n - s) as i32) * s as f64;
    let r = quadrature::integrate_1d(|u| h(u) * diff_power(b - u, s - 1), domain, &tol.for_scaled(factor))
        .or_else(|e| match e {
            QuadError::ToleranceNotReached { best } => Ok(best),
            e => Err(e),
        })?;
    Ok(r.scaled(factor).into_checked()?)
}

/// Mean of `s²(x) / (max x - min x)` over `[a, b]^n`: `(n+2)/(12n) (b-a)`.
pub fn variance_range_average(n: usize, domain: Interval) -> Result<f64, ReductionError> {
    check_dimension(n, 2)?;
    bounded(domain)?;
    Ok((n + 2) as f64 / (12 * n) as f64 * domain.width())
}

/// The variance-to-range integrand in symmetric full form.
pub fn variance_range_integrand(n: usize) -> SymmetricFullIntegrand<impl Fn(&[f64], f64, f64) -> f64 + Sync> {
    SymmetricFullIntegrand::new(n, move |free: &[f64], u: f64, v: f64| {
        let mut x = Vec::with_capacity(free.len() + 2);
        x.extend_from_slice(free);
        x.push(u);
        x.push(v);
        sample_variance(&x) / (v - u)
    })
}
