//! Brute-force estimates used to check the reduced formulas: plain Monte
//! Carlo over the cube or over independent draws, and tensor Gauss–Legendre
//! rules for small `n`.
//!
//! Monte Carlo runs are split into fixed-size chunks, each drawn from its own
//! ChaCha8 stream (`stream = chunk index`), and chunk statistics are merged in
//! chunk order. Results depend only on `(seed, samples)`, never on the number
//! of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::probability::Distribution;
use crate::quadrature::{GaussLegendre, Interval};

/// Largest dimension handled by the tensor rules.
pub const MAX_TENSOR_DIMENSION: usize = 4;
pub const MIN_SAMPLES: usize = 100;
pub const MIN_POINTS_PER_AXIS: usize = 8;

const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OracleError {
    #[error("integrand returned {value}")]
    NonFiniteEvaluation { value: f64 },
    #[error("distribution '{label}' has neither a sampler nor a quantile function")]
    NoSamplingPath { label: String },
    #[error("tensor rules support n <= {MAX_TENSOR_DIMENSION}, got {n}")]
    DimensionTooLarge { n: usize },
    #[error("need n >= 1, got {n}")]
    InvalidDimension { n: usize },
    #[error("need at least {MIN_SAMPLES} samples, got {samples}")]
    TooFewSamples { samples: usize },
    #[error("need at least {MIN_POINTS_PER_AXIS} points per axis, got {points}")]
    TooFewPoints { points: usize },
    #[error("domain ({lower}, {upper}) must be bounded")]
    DomainUnbounded { lower: f64, upper: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(samples)`.
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

impl McEstimate {
    /// `|value - mean|` in units of the standard error; 0 when both vanish.
    pub fn sigma_gap(&self, value: f64) -> f64 {
        let d = (value - self.mean).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }
}

// Count, mean and sum of squared deviations of one chunk.
#[derive(Debug, Clone, Copy)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    const EMPTY: Self = Self { count: 0.0, mean: 0.0, m2: 0.0 };

    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.count;
        self.m2 += delta * (x - self.mean);
    }

    // Chan et al. pairwise update.
    fn merge(self, other: Self) -> Self {
        if other.count == 0.0 {
            return self;
        }
        if self.count == 0.0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Self {
            count,
            mean: self.mean + delta * other.count / count,
            m2: self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        }
    }
}

fn check_samples(samples: usize) -> Result<(), OracleError> {
    if samples < MIN_SAMPLES {
        Err(OracleError::TooFewSamples { samples })
    } else {
        Ok(())
    }
}

fn bounded(domain: Interval) -> Result<(), OracleError> {
    if domain.is_bounded() {
        Ok(())
    } else {
        Err(OracleError::DomainUnbounded { lower: domain.lower(), upper: domain.upper() })
    }
}

// Run `draw` over all chunks in parallel and merge in chunk order.
fn run_chunks<D>(samples: usize, seed: u64, draw: D) -> Result<Moments, OracleError>
where
    D: Fn(&mut ChaCha8Rng) -> Result<f64, OracleError> + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Result<Moments, OracleError>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            let mut m = Moments::EMPTY;
            for _ in 0..len {
                m.push(draw(&mut rng)?);
            }
            Ok(m)
        })
        .collect();
    parts.into_iter().try_fold(Moments::EMPTY, |acc, m| Ok(acc.merge(m?)))
}

fn estimate(m: Moments, scale: f64, samples: usize, seed: u64) -> McEstimate {
    let var = if m.count > 1.0 { m.m2 / (m.count - 1.0) } else { 0.0 };
    McEstimate {
        mean: scale * m.mean,
        std_error: scale.abs() * (var / m.count).sqrt(),
        samples,
        seed,
    }
}

fn finite(value: f64) -> Result<f64, OracleError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(OracleError::NonFiniteEvaluation { value })
    }
}

/// `∫_{(a,b)^n} f(x, min x, max x) dx` by uniform sampling.
pub fn mc_cube<F>(f: F, n: usize, domain: Interval, samples: usize, seed: u64) -> Result<McEstimate, OracleError>
where
    F: Fn(&[f64], f64, f64) -> f64 + Sync,
{
    if n == 0 {
        return Err(OracleError::InvalidDimension { n });
    }
    check_samples(samples)?;
    bounded(domain)?;
    let (a, w) = (domain.lower(), domain.width());
    let m = run_chunks(samples, seed, |rng| {
        let mut x = vec![0.0; n];
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for xi in &mut x {
            *xi = a + w * rng.random::<f64>();
            lo = lo.min(*xi);
            hi = hi.max(*xi);
        }
        finite(f(&x, lo, hi))
    })?;
    Ok(estimate(m, w.powi(n as i32), samples, seed))
}

/// `E[g(min X_i, max X_i)]` for independent `X_i ~ dists[i]`, sampling each
/// distribution directly or by inversion.
pub fn mc_expect<G>(g: G, dists: &[Distribution], samples: usize, seed: u64) -> Result<McEstimate, OracleError>
where
    G: Fn(f64, f64) -> f64 + Sync,
{
    if dists.is_empty() {
        return Err(OracleError::InvalidDimension { n: 0 });
    }
    check_samples(samples)?;
    if let Some(d) = dists.iter().find(|d| !d.can_sample()) {
        return Err(OracleError::NoSamplingPath { label: d.label().to_string() });
    }
    let m = run_chunks(samples, seed, |rng| {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for d in dists {
            let x = d.sample(rng).expect("checked above");
            lo = lo.min(x);
            hi = hi.max(x);
        }
        finite(g(lo, hi))
    })?;
    Ok(estimate(m, 1.0, samples, seed))
}

fn check_tensor(n: usize, domain: Interval, points: usize) -> Result<(), OracleError> {
    if n == 0 {
        return Err(OracleError::InvalidDimension { n });
    }
    if n > MAX_TENSOR_DIMENSION {
        return Err(OracleError::DimensionTooLarge { n });
    }
    if points < MIN_POINTS_PER_AXIS {
        return Err(OracleError::TooFewPoints { points });
    }
    bounded(domain)
}

/// `∫_{(a,b)^n} f(x, min x, max x) dx` by Gauss–Legendre product rules.
///
/// A plain product rule converges slowly across the kinks of `min` and
/// `max`, so the cube is cut into the `n!` order cells
/// `x_{σ(1)} < … < x_{σ(n)}` and each cell gets its own collapsed product
/// rule. Integrands smooth on every cell are then integrated to the rule's
/// full order.
pub fn tensor_cube<F>(f: F, n: usize, domain: Interval, points_per_axis: usize) -> Result<f64, OracleError>
where
    F: Fn(&[f64], f64, f64) -> f64,
{
    check_tensor(n, domain, points_per_axis)?;
    let rule = GaussLegendre::new(points_per_axis);
    let (a, b) = (domain.lower(), domain.upper());
    let orders = permutations(n);
    let mut y = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut total = 0.0;
    for sigma in &orders {
        total += cell(&rule, 0, a, b, 1.0, &mut y, &mut |y: &[f64]| {
            for (k, &s) in sigma.iter().enumerate() {
                x[s] = y[k];
            }
            f(&x, y[0], y[n - 1])
        });
    }
    Ok(total)
}

// Nested rule on lower < y_level < … < y_{n-1} < b.
fn cell<E>(rule: &GaussLegendre, level: usize, lower: f64, b: f64, weight: f64, y: &mut [f64], eval: &mut E) -> f64
where
    E: FnMut(&[f64]) -> f64,
{
    if level == y.len() {
        return weight * eval(y);
    }
    let mut sum = 0.0;
    for (t, w) in rule.mapped(lower, b) {
        y[level] = t;
        sum += cell(rule, level + 1, t, b, weight * w, y, eval);
    }
    sum
}

/// Plain tensor Gauss–Legendre rule over `(a, b)^n` for smooth `f`.
pub fn gauss_product<F>(f: F, n: usize, domain: Interval, points_per_axis: usize) -> Result<f64, OracleError>
where
    F: Fn(&[f64]) -> f64,
{
    check_tensor(n, domain, points_per_axis)?;
    let nodes: Vec<(f64, f64)> = GaussLegendre::new(points_per_axis).mapped(domain.lower(), domain.upper()).collect();
    let mut x = vec![0.0; n];
    Ok(product(&nodes, 0, 1.0, &mut x, &f))
}

fn product<F>(nodes: &[(f64, f64)], level: usize, weight: f64, x: &mut [f64], f: &F) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    if level == x.len() {
        return weight * f(x);
    }
    let mut sum = 0.0;
    for &(t, w) in nodes {
        x[level] = t;
        sum += product(nodes, level + 1, weight * w, x, f);
    }
    sum
}

/// `∫_{P_j} f` over the polyhedron `P_j = {x : x_i > x_j for all i != j}` of
/// `(a, b)^n`, as `∫_a^b du ∫_{(u,b)^{n-1}} f(x | x_j = u)` with a product
/// rule in each variable. `j` is 0-based.
pub fn polyhedron_integral<F>(f: F, n: usize, j: usize, domain: Interval, points_per_axis: usize) -> Result<f64, OracleError>
where
    F: Fn(&[f64]) -> f64,
{
    check_tensor(n, domain, points_per_axis)?;
    if j >= n {
        return Err(OracleError::InvalidDimension { n: j + 1 });
    }
    let rule = GaussLegendre::new(points_per_axis);
    let (a, b) = (domain.lower(), domain.upper());
    let others: Vec<usize> = (0..n).filter(|&i| i != j).collect();
    let mut x = vec![0.0; n];
    let mut total = 0.0;
    for (u, wu) in rule.mapped(a, b) {
        x[j] = u;
        let nodes: Vec<(f64, f64)> = rule.mapped(u, b).collect();
        total += wu * over_others(&nodes, &others, 0, 1.0, &mut x, &f);
    }
    Ok(total)
}

fn over_others<F>(nodes: &[(f64, f64)], others: &[usize], level: usize, weight: f64, x: &mut [f64], f: &F) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    if level == others.len() {
        return weight * f(x);
    }
    let mut sum = 0.0;
    for &(t, w) in nodes {
        x[others[level]] = t;
        sum += over_others(nodes, others, level + 1, weight * w, x, f);
    }
    sum
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(k - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, k - 1);
            out.push(p);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Interval {
        Interval::unit()
    }

    #[test]
    fn constant_is_exact() {
        let d = Interval::new(-1.0, 2.0).unwrap();
        let e = mc_cube(|_, _, _| 1.0, 3, d, 1000, 5).unwrap();
        assert_eq!(e.mean, 27.0);
        assert_eq!(e.std_error, 0.0);
        let c = mc_expect(|_, _| 2.5, &[Distribution::uniform(0.0, 1.0).unwrap()], 500, 1).unwrap();
        assert_eq!(c.mean, 2.5);
        assert_eq!(c.std_error, 0.0);
        for n in 1..=4 {
            let t = tensor_cube(|_, _, _| 1.0, n, d, 8).unwrap();
            assert!((t - 3f64.powi(n as i32)).abs() < 1e-12 * 3f64.powi(n as i32));
        }
    }

    #[test]
    fn expected_range_by_sampling() {
        let e = mc_cube(|_, lo, hi| hi - lo, 2, unit(), 1_000_000, 11).unwrap();
        assert!(e.sigma_gap(1.0 / 3.0) < 4.0, "{e:?}");
    }

    #[test]
    fn variance_to_range_by_sampling() {
        let f = |x: &[f64], lo: f64, hi: f64| {
            let m = x.iter().sum::<f64>() / x.len() as f64;
            x.iter().map(|t| (t - m) * (t - m)).sum::<f64>() / (x.len() - 1) as f64 / (hi - lo)
        };
        let e = mc_cube(f, 3, unit(), 1_000_000, 3).unwrap();
        assert!(e.sigma_gap(5.0 / 36.0) < 4.0, "{e:?}");
    }

    #[test]
    fn relative_range_and_exponential_range_by_sampling() {
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        let e = mc_expect(|lo, hi| (hi - lo) / hi, &[u.clone(), u.clone(), u], 1_000_000, 9).unwrap();
        assert!(e.sigma_gap(2.0 / 3.0) < 4.0, "{e:?}");
        let x = Distribution::exponential(1.0).unwrap();
        let e = mc_expect(|lo, hi| hi - lo, &[x.clone(), x], 1_000_000, 9).unwrap();
        assert!(e.sigma_gap(1.0) < 4.0, "{e:?}");
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let f = |x: &[f64], lo: f64, hi: f64| x[0] * hi - lo;
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| mc_cube(f, 3, unit(), 100_000, 42).unwrap());
        let b = four.install(|| mc_cube(f, 3, unit(), 100_000, 42).unwrap());
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = mc_cube(f, 3, unit(), 100_000, 43).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn standard_error_scales_with_root_samples() {
        let f = |_: &[f64], lo: f64, hi: f64| hi * hi - lo;
        let e4 = mc_cube(f, 2, unit(), 10_000, 1).unwrap();
        let e5 = mc_cube(f, 2, unit(), 100_000, 1).unwrap();
        let e6 = mc_cube(f, 2, unit(), 1_000_000, 1).unwrap();
        let r1 = e5.std_error / e4.std_error;
        let r2 = e6.std_error / e5.std_error;
        assert!((0.27..=0.37).contains(&r1), "{r1}");
        assert!((0.27..=0.37).contains(&r2), "{r2}");
    }

    #[test]
    fn tensor_min_and_geometric_kernel() {
        let t = tensor_cube(|_, lo, _| lo, 2, unit(), 64).unwrap();
        assert!((t - 1.0 / 3.0).abs() < 1e-6);
        let k = tensor_cube(|_, u, v| ((u * v).sqrt() - u) / (v - u), 2, unit(), 64).unwrap();
        assert!((k - (4f64.ln() - 1.0)).abs() < 1e-5, "{k}");
    }

    #[test]
    fn tensor_rules_on_asymmetric_integrands() {
        // E[x_1 max x] for n = 3: x_1 is the max with probability 1/3, giving
        // E[M^2]/3 = 1/5; otherwise x_1 ~ U(0, M), giving (2/3) E[M^2]/2 = 1/5.
        let f = |x: &[f64], _: f64, hi: f64| x[0] * hi;
        let t = tensor_cube(f, 3, unit(), 8).unwrap();
        assert!((t - 0.4).abs() < 1e-14, "{t}");
        let e = mc_cube(f, 3, unit(), 1_000_000, 2).unwrap();
        assert!(e.sigma_gap(0.4) < 4.0, "{e:?}");
    }

    #[test]
    fn polyhedra_partition_the_cube() {
        let f = |x: &[f64]| (x[0] + 2.0 * x[1] * x[2]).exp() * (1.0 + x[2]);
        let d = Interval::new(-0.5, 1.0).unwrap();
        let whole = gauss_product(f, 3, d, 16).unwrap();
        let parts: f64 = (0..3).map(|j| polyhedron_integral(f, 3, j, d, 16).unwrap()).sum();
        assert!((whole - parts).abs() < 1e-10 * whole.abs(), "{whole} vs {parts}");
    }

    #[test]
    fn argument_checks() {
        assert_eq!(tensor_cube(|_, _, _| 1.0, 5, unit(), 8), Err(OracleError::DimensionTooLarge { n: 5 }));
        assert_eq!(tensor_cube(|_, _, _| 1.0, 2, unit(), 4), Err(OracleError::TooFewPoints { points: 4 }));
        assert!(matches!(mc_cube(|_, _, _| 1.0, 2, unit(), 10, 0), Err(OracleError::TooFewSamples { .. })));
        assert!(matches!(mc_cube(|_, _, _| f64::NAN, 2, unit(), 100, 0), Err(OracleError::NonFiniteEvaluation { .. })));
        let bare = Distribution::from_cdf("bare", unit(), |x| x);
        assert!(matches!(mc_expect(|_, _| 1.0, &[bare], 100, 0), Err(OracleError::NoSamplingPath { .. })));
        assert_eq!(permutations(4).len(), 24);
    }
}
