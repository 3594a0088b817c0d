use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::ProbabilityError;
use crate::quadrature::{self, transform_unbounded, Interval, Tolerance};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Sampler = Arc<dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync>;

/// A continuous distribution on the real line.
///
/// Only the CDF is mandatory. Expectations prefer the density, then the
/// quantile function; sampling prefers an explicit sampler, then inversion
/// through the quantile function.
#[derive(Clone)]
pub struct Distribution {
    label: String,
    support: Interval,
    cdf: RealFn,
    pdf: Option<RealFn>,
    quantile: Option<RealFn>,
    sampler: Option<Sampler>,
    breaks: Vec<f64>,
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Distribution")
            .field("label", &self.label)
            .field("support", &self.support)
            .field("pdf", &self.pdf.is_some())
            .field("quantile", &self.quantile.is_some())
            .field("sampler", &self.sampler.is_some())
            .finish()
    }
}

impl Distribution {
    /// A distribution known only through its CDF.
    pub fn from_cdf<C>(label: impl Into<String>, support: Interval, cdf: C) -> Self
    where
        C: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            support,
            cdf: Arc::new(cdf),
            pdf: None,
            quantile: None,
            sampler: None,
            breaks: Vec::new(),
        }
    }

    pub fn with_pdf<P>(mut self, pdf: P) -> Self
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.pdf = Some(Arc::new(pdf));
        self
    }

    pub fn with_quantile<Q>(mut self, quantile: Q) -> Self
    where
        Q: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.quantile = Some(Arc::new(quantile));
        self
    }

    pub fn with_sampler<S>(mut self, sampler: S) -> Self
    where
        S: Fn(&mut dyn RngCore) -> f64 + Send + Sync + 'static,
    {
        self.sampler = Some(Arc::new(sampler));
        self
    }

    /// Points where the density may be non-smooth.
    pub fn with_breaks(mut self, breaks: Vec<f64>) -> Self {
        self.breaks = breaks;
        self
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self, ProbabilityError> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(ProbabilityError::InvalidParameter(format!("uniform needs finite lower < upper, got ({lower}, {upper})")));
        }
        let w = upper - lower;
        let support = Interval::new(lower, upper)?;
        Ok(Self::from_cdf(format!("uniform({lower}, {upper})"), support, move |x| ((x - lower) / w).clamp(0.0, 1.0))
            .with_pdf(move |x| if x > lower && x < upper { 1.0 / w } else { 0.0 })
            .with_quantile(move |p| lower + w * p)
            .with_sampler(move |rng| lower + w * rng.random::<f64>()))
    }

    pub fn exponential(rate: f64) -> Result<Self, ProbabilityError> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(ProbabilityError::InvalidParameter(format!("exponential needs rate > 0, got {rate}")));
        }
        let support = Interval::new(0.0, f64::INFINITY)?;
        Ok(Self::from_cdf(format!("exponential({rate})"), support, move |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() })
            .with_pdf(move |x| if x <= 0.0 { 0.0 } else { rate * (-rate * x).exp() })
            .with_quantile(move |p| -(-p).ln_1p() / rate)
            .with_sampler(move |rng| -(-rng.random::<f64>()).ln_1p() / rate))
    }

    /// Monotone piecewise-cubic (Fritsch–Carlson) interpolation of a CDF
    /// table. `cdf` must start at 0, end at 1 and never decrease; `x` must
    /// strictly increase.
    pub fn table(x: Vec<f64>, cdf: Vec<f64>) -> Result<Self, ProbabilityError> {
        let interp = MonotoneCubic::new(x, cdf)?;
        let xs = interp.x.clone();
        let support = Interval::new(xs[0], xs[xs.len() - 1])?;
        let interp = Arc::new(interp);
        let (c, d, q) = (interp.clone(), interp.clone(), interp);
        Ok(Self::from_cdf(format!("table({} knots)", xs.len()), support, move |t| c.value(t))
            .with_pdf(move |t| d.derivative(t))
            .with_quantile(move |p| q.inverse(p))
            .with_breaks(xs))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (self.cdf)(x)
    }

    pub fn pdf(&self, x: f64) -> Option<f64> {
        self.pdf.as_ref().map(|p| p(x))
    }

    pub fn quantile(&self, p: f64) -> Option<f64> {
        self.quantile.as_ref().map(|q| q(p))
    }

    pub fn has_pdf(&self) -> bool {
        self.pdf.is_some()
    }

    pub fn has_quantile(&self) -> bool {
        self.quantile.is_some()
    }

    pub fn can_sample(&self) -> bool {
        self.sampler.is_some() || self.quantile.is_some()
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub(crate) fn pdf_fn(&self) -> Option<&RealFn> {
        self.pdf.as_ref()
    }

    pub(crate) fn quantile_fn(&self) -> Option<&RealFn> {
        self.quantile.as_ref()
    }

    /// One draw, by the sampler or by inversion.
    pub fn sample(&self, rng: &mut dyn RngCore) -> Option<f64> {
        if let Some(s) = &self.sampler {
            return Some(s(rng));
        }
        self.quantile.as_ref().map(|q| q(rng.random::<f64>()))
    }

    /// Check the CDF at 100 points of the support (monotone, tends to 0 and
    /// 1 at the ends) and, when a density is present, that it integrates to 1.
    pub fn validate(&self) -> Result<(), ProbabilityError> {
        let grid = self.grid(100);
        let mut prev = f64::NEG_INFINITY;
        for &x in &grid {
            let c = self.cdf(x);
            if !(0.0..=1.0).contains(&c) {
                return Err(ProbabilityError::InvalidDistribution(format!("cdf({x}) = {c} outside [0, 1]")));
            }
            if c < prev {
                return Err(ProbabilityError::InvalidDistribution(format!("cdf decreases at x = {x}")));
            }
            prev = c;
        }
        let (lo, hi) = self.extremes();
        if self.cdf(lo) > 1e-6 || self.cdf(hi) < 1.0 - 1e-6 {
            return Err(ProbabilityError::InvalidDistribution(format!(
                "cdf does not run from 0 to 1 over the support ({} .. {})",
                self.cdf(lo),
                self.cdf(hi)
            )));
        }
        if let Some(pdf) = &self.pdf {
            let tol = Tolerance::new(1e-10, 1e-11, 1_000_000)?;
            let mass = quadrature::integrate_1d(|x| pdf(x), self.support, &tol).map_err(|e| match e {
                quadrature::QuadError::ToleranceNotReached { best } => {
                    ProbabilityError::InvalidDistribution(format!("density integral did not converge ({})", best.value))
                }
                e => e.into(),
            })?;
            if (mass.value - 1.0).abs() > 1e-8 {
                return Err(ProbabilityError::InvalidDistribution(format!("density integrates to {}", mass.value)));
            }
        }
        Ok(())
    }

    fn grid(&self, count: usize) -> Vec<f64> {
        let s = self.support;
        if s.is_bounded() {
            (0..count).map(|i| s.lower() + s.width() * (i as f64 + 0.5) / count as f64).collect()
        } else {
            let sub = transform_unbounded(s).expect("unbounded support");
            let m = sub.mapped();
            (0..count).map(|i| sub.point(m.lower() + m.width() * (i as f64 + 0.5) / count as f64)).collect()
        }
    }

    fn extremes(&self) -> (f64, f64) {
        let s = self.support;
        if s.is_bounded() {
            let eps = 1e-12 * s.width();
            (s.lower() + eps, s.upper() - eps)
        } else {
            let sub = transform_unbounded(s).expect("unbounded support");
            let m = sub.mapped();
            let eps = 1e-9 * m.width();
            let lo = if s.lower().is_finite() { s.lower() + 1e-12 } else { sub.point(m.lower() + eps) };
            let hi = if s.upper().is_finite() { s.upper() - 1e-12 } else { sub.point(m.upper() - eps) };
            (lo, hi)
        }
    }
}

/// Serialized distribution description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistributionSpec {
    Uniform {
        #[serde(alias = "a")]
        lower: f64,
        #[serde(alias = "b")]
        upper: f64,
    },
    Exponential {
        #[serde(alias = "lambda")]
        rate: f64,
    },
    Table { x: Vec<f64>, cdf: Vec<f64> },
}

impl DistributionSpec {
    /// Flat `kind:params` form: `uniform:0,1`, `exp:2`, `exponential:0.5`.
    pub fn parse_flat(text: &str) -> Result<Self, ProbabilityError> {
        let bad = || ProbabilityError::InvalidParameter(format!("cannot parse distribution '{text}' (expected uniform:a,b or exp:rate)"));
        let (kind, params) = text.split_once(':').ok_or_else(bad)?;
        let values: Vec<f64> = params
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        match (kind.trim(), values.as_slice()) {
            ("uniform" | "unif", [a, b]) => Ok(DistributionSpec::Uniform { lower: *a, upper: *b }),
            ("exp" | "exponential", [rate]) => Ok(DistributionSpec::Exponential { rate: *rate }),
            _ => Err(bad()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ProbabilityError> {
        serde_json::from_str(text).map_err(|e| ProbabilityError::InvalidParameter(format!("distribution JSON: {e}")))
    }

    pub fn build(&self) -> Result<Distribution, ProbabilityError> {
        match self {
            DistributionSpec::Uniform { lower, upper } => Distribution::uniform(*lower, *upper),
            DistributionSpec::Exponential { rate } => Distribution::exponential(*rate),
            DistributionSpec::Table { x, cdf } => Distribution::table(x.clone(), cdf.clone()),
        }
    }
}

/// Fritsch–Carlson monotone cubic Hermite interpolant.
#[derive(Debug, Clone)]
struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, ProbabilityError> {
        let bad = |msg: String| Err(ProbabilityError::NonMonotoneTable(msg));
        if x.len() != y.len() || x.len() < 2 {
            return bad(format!("need matching x/cdf arrays with at least 2 entries (got {} and {})", x.len(), y.len()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return bad("table entries must be finite".into());
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return bad("x must be strictly increasing".into());
        }
        if y.windows(2).any(|w| w[1] < w[0]) {
            return bad("cdf values must be nondecreasing".into());
        }
        if y[0].abs() > 1e-12 || (y[y.len() - 1] - 1.0).abs() > 1e-12 {
            return bad(format!("cdf must run from 0 to 1, got {} .. {}", y[0], y[y.len() - 1]));
        }

        let n = x.len();
        let secants: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            slopes[i] = if secants[i - 1] * secants[i] <= 0.0 { 0.0 } else { 0.5 * (secants[i - 1] + secants[i]) };
        }
        for i in 0..n - 1 {
            let d = secants[i];
            if d == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let alpha = slopes[i] / d;
            let beta = slopes[i + 1] / d;
            let r = alpha * alpha + beta * beta;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slopes[i] = tau * alpha * d;
                slopes[i + 1] = tau * beta * d;
            }
        }
        Ok(Self { x, y, slopes })
    }

    fn segment(&self, t: f64) -> usize {
        match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            k => (k - 1).min(self.x.len() - 2),
        }
    }

    fn value(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return 0.0;
        }
        if t >= self.x[n - 1] {
            return 1.0;
        }
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        (h00 * self.y[i] + h10 * h * self.slopes[i] + h01 * self.y[i + 1] + h11 * h * self.slopes[i + 1]).clamp(0.0, 1.0)
    }

    fn derivative(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] || t >= self.x[n - 1] {
            return 0.0;
        }
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let s2 = s * s;
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        (d00 * self.y[i] + d10 * self.slopes[i] + d01 * self.y[i + 1] + d11 * self.slopes[i + 1]).max(0.0)
    }

    fn inverse(&self, p: f64) -> f64 {
        let n = self.x.len();
        let (mut lo, mut hi) = (self.x[0], self.x[n - 1]);
        if p <= 0.0 {
            return lo;
        }
        if p >= 1.0 {
            return hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.value(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn builtins_validate() {
        Distribution::uniform(0.0, 1.0).unwrap().validate().unwrap();
        Distribution::uniform(-3.0, 5.0).unwrap().validate().unwrap();
        Distribution::exponential(0.5).unwrap().validate().unwrap();
        Distribution::exponential(4.0).unwrap().validate().unwrap();
    }

    #[test]
    fn bad_parameters() {
        assert!(Distribution::uniform(1.0, 1.0).is_err());
        assert!(Distribution::exponential(0.0).is_err());
        assert!(Distribution::exponential(f64::NAN).is_err());
    }

    #[test]
    fn broken_cdf_is_rejected() {
        let d = Distribution::from_cdf("half", Interval::unit(), |x| 0.5 * x);
        assert!(matches!(d.validate(), Err(ProbabilityError::InvalidDistribution(_))));
        let d = Distribution::from_cdf("wiggle", Interval::unit(), |x| x + 0.5 * (20.0 * x).sin() * x * (1.0 - x));
        assert!(d.validate().is_err());
        let d = Distribution::uniform(0.0, 1.0).unwrap().with_pdf(|_| 2.0);
        assert!(d.validate().is_err());
    }

    #[test]
    fn table_interpolation_is_monotone_and_exact_at_knots() {
        let x = vec![0.0, 0.5, 1.0, 3.0];
        let c = vec![0.0, 0.1, 0.9, 1.0];
        let d = Distribution::table(x.clone(), c.clone()).unwrap();
        d.validate().unwrap();
        for (xi, ci) in x.iter().zip(&c) {
            assert!((d.cdf(*xi) - ci).abs() < 1e-15);
        }
        let mut prev = 0.0;
        for i in 0..=3000 {
            let v = d.cdf(3.0 * i as f64 / 3000.0);
            assert!(v >= prev);
            prev = v;
        }
        for p in [0.05, 0.3, 0.95] {
            let q = d.quantile(p).unwrap();
            assert!((d.cdf(q) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn table_reproduces_uniform() {
        let d = Distribution::table(vec![0.0, 0.25, 1.0], vec![0.0, 0.25, 1.0]).unwrap();
        for t in [0.1, 0.4, 0.9] {
            assert!((d.cdf(t) - t).abs() < 1e-15);
            assert!((d.pdf(t).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn non_monotone_tables_are_rejected() {
        assert!(matches!(Distribution::table(vec![0.0, 1.0, 2.0], vec![0.0, 0.6, 0.5]), Err(ProbabilityError::NonMonotoneTable(_))));
        assert!(Distribution::table(vec![0.0, 0.0, 2.0], vec![0.0, 0.5, 1.0]).is_err());
        assert!(Distribution::table(vec![0.0, 1.0], vec![0.1, 1.0]).is_err());
        assert!(Distribution::table(vec![0.0], vec![0.0]).is_err());
    }

    #[test]
    fn flat_and_json_specs() {
        assert_eq!(DistributionSpec::parse_flat("uniform:0,1").unwrap(), DistributionSpec::Uniform { lower: 0.0, upper: 1.0 });
        assert_eq!(DistributionSpec::parse_flat("exp:2").unwrap(), DistributionSpec::Exponential { rate: 2.0 });
        assert!(DistributionSpec::parse_flat("normal:0,1").is_err());
        assert!(DistributionSpec::parse_flat("uniform:0").is_err());
        let spec = DistributionSpec::from_json(r#"{"kind": "table", "x": [0, 1], "cdf": [0, 1]}"#).unwrap();
        assert!(matches!(spec, DistributionSpec::Table { .. }));
        let spec = DistributionSpec::from_json(r#"{"kind": "exponential", "lambda": 3}"#).unwrap();
        assert_eq!(spec, DistributionSpec::Exponential { rate: 3.0 });
        assert!(DistributionSpec::from_json(r#"{"kind": "table", "x": [0, 1], "cdf": [0, 0.5]}"#).unwrap().build().is_err());
    }

    #[test]
    fn sampling_by_inversion() {
        let d = Distribution::from_cdf("u", Interval::unit(), |x| x.clamp(0.0, 1.0)).with_quantile(|p| p);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = d.sample(&mut rng).unwrap();
        assert!((0.0..1.0).contains(&s));
        let bare = Distribution::from_cdf("u", Interval::unit(), |x| x);
        assert!(!bare.can_sample());
        assert!(bare.sample(&mut rng).is_none());
    }
}
