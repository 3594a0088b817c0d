use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{bounded, choquet_unchecked, min_max, AggregationError, SetFunction};
use crate::quadrature::Interval;

/// Random points used to spot-check the defining inequalities.
pub const SPOT_CHECKS: usize = 1000;

type Eval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// An aggregation function `F: [a, b]^n → R` with a label and a symmetry
/// flag. Symmetric functions take the cheaper symmetric reduction paths.
#[derive(Clone)]
pub struct AggFn {
    n: usize,
    label: String,
    symmetric: bool,
    eval: Eval,
}

impl fmt::Debug for AggFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AggFn").field("n", &self.n).field("label", &self.label).field("symmetric", &self.symmetric).finish()
    }
}

impl AggFn {
    /// `symmetric` must hold exactly: the reduction checks it on the free
    /// coordinates and relies on it for the rest.
    pub fn new<F>(n: usize, label: impl Into<String>, symmetric: bool, eval: F) -> Result<Self, AggregationError>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if n == 0 {
            return Err(AggregationError::InvalidDimension { n, reason: "need n >= 1" });
        }
        Ok(Self { n, label: label.into(), symmetric, eval: Arc::new(eval) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    // Check `lower(x) <= F(x) <= upper(x)` at SPOT_CHECKS seeded points.
    fn spot_check<L, U>(&self, domain: Interval, property: &'static str, lower: L, upper: U) -> Result<(), AggregationError>
    where
        L: Fn(&[f64]) -> f64,
        U: Fn(&[f64]) -> f64,
    {
        bounded(domain)?;
        let mut rng = ChaCha8Rng::seed_from_u64(0xa66);
        let slack = 1e-12 * domain.lower().abs().max(domain.upper().abs()).max(1.0);
        let mut x = vec![0.0; self.n];
        for _ in 0..SPOT_CHECKS {
            x.iter_mut().for_each(|t| *t = domain.lower() + domain.width() * rng.random::<f64>());
            let value = self.eval(&x);
            if !(value >= lower(&x) - slack && value <= upper(&x) + slack) {
                return Err(AggregationError::PropertyViolated { label: self.label.clone(), property, point: x, value });
            }
        }
        Ok(())
    }
}

/// `min x <= F(x) <= max x` (spot-checked).
#[derive(Debug, Clone)]
pub struct InternalFunction(AggFn);

/// `a <= F(x) <= min x` (spot-checked).
#[derive(Debug, Clone)]
pub struct ConjunctiveFunction(AggFn);

/// `max x <= F(x) <= b` (spot-checked).
#[derive(Debug, Clone)]
pub struct DisjunctiveFunction(AggFn);

impl InternalFunction {
    pub fn new(f: AggFn, domain: Interval) -> Result<Self, AggregationError> {
        f.spot_check(domain, "internal", |x| min_max(x).0, |x| min_max(x).1)?;
        Ok(Self(f))
    }

    pub fn arithmetic_mean(n: usize, domain: Interval) -> Result<Self, AggregationError> {
        let f = AggFn::new(n, "arithmetic mean", true, |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64)?;
        Self::new(f, domain)
    }

    /// Needs a domain in `[0, ∞)`.
    pub fn geometric_mean(n: usize, domain: Interval) -> Result<Self, AggregationError> {
        if domain.lower() < 0.0 {
            return Err(AggregationError::InvalidArgument("the geometric mean needs a nonnegative domain".into()));
        }
        let f = AggFn::new(n, "geometric mean", true, |x: &[f64]| {
            let k = x.len();
            match k {
                2 => (x[0] * x[1]).sqrt(),
                _ => x.iter().product::<f64>().powf(1.0 / k as f64),
            }
        })?;
        Self::new(f, domain)
    }

    pub fn minimum(n: usize, domain: Interval) -> Result<Self, AggregationError> {
        let f = AggFn::new(n, "min", true, |x: &[f64]| min_max(x).0)?;
        Self::new(f, domain)
    }

    pub fn maximum(n: usize, domain: Interval) -> Result<Self, AggregationError> {
        let f = AggFn::new(n, "max", true, |x: &[f64]| min_max(x).1)?;
        Self::new(f, domain)
    }

    /// The Choquet integral of `a`; symmetric when `a(S)` depends only on `|S|`.
    pub fn choquet(a: &SetFunction, domain: Interval) -> Result<Self, AggregationError> {
        let symmetric = cardinality_only(a);
        let a = a.clone();
        let f = AggFn::new(a.n(), "Choquet integral", symmetric, move |x: &[f64]| choquet_unchecked(&a, x))?;
        Self::new(f, domain)
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0.eval(x)
    }

    pub fn as_agg(&self) -> &AggFn {
        &self.0
    }
}

impl ConjunctiveFunction {
    pub fn new(f: AggFn, domain: Interval) -> Result<Self, AggregationError> {
        let a = domain.lower();
        f.spot_check(domain, "conjunctive", |_| a, |x| min_max(x).0)?;
        Ok(Self(f))
    }

    /// Conjunctive on `[0, b]` with `b <= 1`.
    pub fn product(n: usize, domain: Interval) -> Result<Self, AggregationError> {
        let f = AggFn::new(n, "product", true, |x: &[f64]| x.iter().product())?;
        Self::new(f, domain)
    }

    pub fn minimum(n: usize, domain: Interval) -> Result<Self, AggregationError> {
        let f = AggFn::new(n, "min", true, |x: &[f64]| min_max(x).0)?;
        Self::new(f, domain)
    }

    pub fn as_agg(&self) -> &AggFn {
        &self.0
    }
}

impl DisjunctiveFunction {
    pub fn new(f: AggFn, domain: Interval) -> Result<Self, AggregationError> {
        let b = domain.upper();
        f.spot_check(domain, "disjunctive", |x| min_max(x).1, |_| b)?;
        Ok(Self(f))
    }

    pub fn maximum(n: usize, domain: Interval) -> Result<Self, AggregationError> {
        let f = AggFn::new(n, "max", true, |x: &[f64]| min_max(x).1)?;
        Self::new(f, domain)
    }

    /// `1 - Π (1 - x_i)`, disjunctive on `[a, 1]` with `a >= 0`.
    pub fn probabilistic_sum(n: usize, domain: Interval) -> Result<Self, AggregationError> {
        let f = AggFn::new(n, "probabilistic sum", true, |x: &[f64]| 1.0 - x.iter().map(|t| 1.0 - t).product::<f64>())?;
        Self::new(f, domain)
    }

    pub fn as_agg(&self) -> &AggFn {
        &self.0
    }
}

fn cardinality_only(a: &SetFunction) -> bool {
    let n = a.n();
    let mut by_size: Vec<Option<f64>> = vec![None; n + 1];
    for mask in 1..=super::set_function::full_mask(n) {
        let w = a.weight(mask);
        let s = mask.count_ones() as usize;
        match by_size[s] {
            None => by_size[s] = Some(w),
            Some(prev) if prev != w => return false,
            _ => {}
        }
    }
    true
}
