use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AggregationError;

/// Largest `n` a set function may have (weights are indexed by bitmask).
pub const MAX_SET_SIZE: usize = 20;
/// Largest `n` for which monotonicity is checked exactly.
pub const EXACT_MONOTONE_LIMIT: usize = 4;

const MONOTONE_SAMPLES: usize = 2000;

/// Weights `a(S)` on the nonempty subsets of `{1, …, n}`, summing to one.
/// Bit `i - 1` of a mask stands for element `i`. Zero weights are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SetFunction {
    n: usize,
    weights: BTreeMap<u32, f64>,
    monotone_checked: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SetFunctionFile {
    n: usize,
    weights: Vec<WeightEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightEntry {
    subset: Vec<usize>,
    value: f64,
}

impl SetFunction {
    /// Build from `(mask, weight)` pairs. Masks must be nonzero, fit in `n`
    /// bits and appear once; the weights must sum to 1 within 1e-12.
    ///
    /// A Choquet integral with these weights that fails the monotonicity
    /// check only triggers a warning: the closed forms hold for any weights
    /// summing to one.
    pub fn new(n: usize, entries: impl IntoIterator<Item = (u32, f64)>) -> Result<Self, AggregationError> {
        let invalid = |msg: String| Err(AggregationError::InvalidSetFunction(msg));
        if n == 0 || n > MAX_SET_SIZE {
            return invalid(format!("n must be in 1..={MAX_SET_SIZE}, got {n}"));
        }
        let full = full_mask(n);
        let mut weights = BTreeMap::new();
        for (mask, value) in entries {
            if mask == 0 {
                return invalid("the empty set cannot carry weight".into());
            }
            if mask & !full != 0 {
                return invalid(format!("subset mask {mask:#b} has elements beyond n = {n}"));
            }
            if !value.is_finite() {
                return invalid(format!("weight of {} is not finite", subset_label(mask)));
            }
            if weights.insert(mask, value).is_some() {
                return invalid(format!("subset {} listed twice", subset_label(mask)));
            }
        }
        weights.retain(|_, v| *v != 0.0);
        let total: f64 = weights.values().sum();
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("weights sum to {total}, not 1"));
        }
        let mut a = Self { n, weights, monotone_checked: false };
        let violations = a.monotonicity_violations();
        if violations.is_empty() {
            a.monotone_checked = true;
        } else {
            log::warn!("the Choquet integral of this set function is not nondecreasing: {}", violations[0]);
        }
        Ok(a)
    }

    /// Build from 1-based element lists.
    pub fn from_subsets(n: usize, entries: &[(Vec<usize>, f64)]) -> Result<Self, AggregationError> {
        let mut masks = Vec::with_capacity(entries.len());
        for (subset, value) in entries {
            masks.push((subset_mask(n, subset)?, *value));
        }
        Self::new(n, masks)
    }

    /// `a([n]) = 1`: the Choquet integral is the minimum.
    pub fn minimum(n: usize) -> Result<Self, AggregationError> {
        Self::new(n, [(full_mask(n), 1.0)])
    }

    /// `a({i}) = 1/n`: the Choquet integral is the arithmetic mean.
    pub fn uniform_singletons(n: usize) -> Result<Self, AggregationError> {
        Self::new(n, (0..n).map(|i| (1u32 << i, 1.0 / n as f64)))
    }

    pub fn from_json(text: &str) -> Result<Self, AggregationError> {
        let file: SetFunctionFile =
            serde_json::from_str(text).map_err(|e| AggregationError::InvalidSetFunction(format!("JSON: {e}")))?;
        let entries: Vec<(Vec<usize>, f64)> = file.weights.into_iter().map(|w| (w.subset, w.value)).collect();
        Self::from_subsets(file.n, &entries)
    }

    pub fn to_json(&self) -> String {
        let file = SetFunctionFile {
            n: self.n,
            weights: self
                .weights
                .iter()
                .map(|(&mask, &value)| WeightEntry { subset: elements(mask), value })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("plain data serializes")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `a(S)` for a bitmask; zero for unlisted subsets.
    pub fn weight(&self, mask: u32) -> f64 {
        self.weights.get(&mask).copied().unwrap_or(0.0)
    }

    /// Nonzero weights in increasing mask order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.weights.iter().map(|(&m, &w)| (m, w))
    }

    /// Whether the Choquet integral was verified to be nondecreasing: exactly
    /// for `n <= 4`, by sampling partial derivatives at random points above.
    pub fn monotone_checked(&self) -> bool {
        self.monotone_checked
    }

    /// Weights as exact rationals. Each weight is read as the shortest
    /// decimal that round-trips to it, and the set is renormalized so that
    /// it sums to exactly one.
    pub fn exact_weights(&self) -> Vec<(u32, BigRational)> {
        let raw: Vec<(u32, BigRational)> = self.iter().map(|(m, w)| (m, decimal_rational(w))).collect();
        let total = raw.iter().fold(BigRational::zero(), |acc, (_, w)| acc + w);
        if total.is_one() {
            raw
        } else {
            raw.into_iter().map(|(m, w)| (m, w / &total)).collect()
        }
    }

    // The Choquet integral is nondecreasing in x_i iff for every T not
    // containing i, Σ_{S ⊆ T} a(S ∪ {i}) >= 0.
    fn monotonicity_violations(&self) -> Vec<String> {
        let n = self.n;
        let mut out = Vec::new();
        if n <= EXACT_MONOTONE_LIMIT {
            for i in 0..n {
                let bit = 1u32 << i;
                for t in 0..=full_mask(n) {
                    if t & bit != 0 {
                        continue;
                    }
                    let d: f64 = self.iter().filter(|(s, _)| s & bit != 0 && (s & !bit) & !t == 0).map(|(_, w)| w).sum();
                    if d < -1e-12 {
                        out.push(format!("∂/∂x{} = {d} where the coordinates in {} lie above x{}", i + 1, subset_label(t), i + 1));
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5e7f);
            let mut x = vec![0.0; n];
            for _ in 0..MONOTONE_SAMPLES {
                x.iter_mut().for_each(|xi| *xi = rng.random::<f64>());
                let i = rng.random_range(0..n);
                // Partial derivative in x_i: weights of the subsets whose
                // minimum is x_i.
                let d: f64 = self
                    .iter()
                    .filter(|(s, _)| s & (1 << i) != 0 && elements(*s).iter().all(|&e| x[e - 1] >= x[i]))
                    .map(|(_, w)| w)
                    .sum();
                if d < -1e-12 {
                    out.push(format!("∂/∂x{} = {d} at a sampled point", i + 1));
                    break;
                }
            }
        }
        out
    }
}

pub(crate) fn full_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

fn subset_mask(n: usize, subset: &[usize]) -> Result<u32, AggregationError> {
    let mut mask = 0u32;
    for &e in subset {
        if e == 0 || e > n {
            return Err(AggregationError::InvalidSetFunction(format!("element {e} outside 1..={n}")));
        }
        let bit = 1u32 << (e - 1);
        if mask & bit != 0 {
            return Err(AggregationError::InvalidSetFunction(format!("element {e} repeated in a subset")));
        }
        mask |= bit;
    }
    Ok(mask)
}

/// 1-based elements of a mask, ascending.
pub(crate) fn elements(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect()
}

fn subset_label(mask: u32) -> String {
    let items: Vec<String> = elements(mask).iter().map(|e| e.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

/// The rational written by the shortest round-trip decimal form of `x`.
pub(crate) fn decimal_rational(x: f64) -> BigRational {
    let text = format!("{x:e}");
    let (mantissa, exponent) = text.split_once('e').expect("exponent form");
    let exponent: i64 = exponent.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits_part = mantissa.trim_start_matches('-');
    let (int, frac) = digits_part.split_once('.').unwrap_or((digits_part, ""));
    let digits = BigInt::from_str(&format!("{int}{frac}")).expect("decimal digits");
    let scale = exponent - frac.len() as i64;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        value = -value;
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn validation() {
        assert!(SetFunction::new(2, [(0b11, 1.0)]).is_ok());
        assert!(SetFunction::new(2, [(0b11, 0.9)]).is_err());
        assert!(SetFunction::new(2, [(0, 0.5), (0b11, 0.5)]).is_err());
        assert!(SetFunction::new(2, [(0b100, 1.0)]).is_err());
        assert!(SetFunction::new(2, [(0b01, 0.5), (0b01, 0.5)]).is_err());
        assert!(SetFunction::new(0, [(1, 1.0)]).is_err());
        assert!(SetFunction::new(21, [(1, 1.0)]).is_err());
        assert!(SetFunction::new(2, [(0b01, f64::NAN), (0b10, 1.0)]).is_err());
        assert!(SetFunction::from_subsets(2, &[(vec![1, 3], 1.0)]).is_err());
        assert!(SetFunction::from_subsets(2, &[(vec![1, 1], 1.0)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"n": 3, "weights": [{"subset": [1], "value": 0.2}, {"subset": [2, 3], "value": 0.5}, {"subset": [1, 2, 3], "value": 0.3}]}"#;
        let a = SetFunction::from_json(text).unwrap();
        assert_eq!(a.weight(0b001), 0.2);
        assert_eq!(a.weight(0b110), 0.5);
        assert_eq!(a.weight(0b111), 0.3);
        assert_eq!(a.weight(0b010), 0.0);
        let back = SetFunction::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
        assert!(SetFunction::from_json(r#"{"n": 2, "weights": [{"subset": [], "value": 1.0}]}"#).is_err());
        assert!(SetFunction::from_json(r#"{"n": 2, "weights": [{"subset": [1], "value": 0.6}]}"#).is_err());
        assert!(SetFunction::from_json("{").is_err());
    }

    #[test]
    fn monotonicity_exact_and_sampled() {
        assert!(SetFunction::minimum(4).unwrap().monotone_checked());
        assert!(SetFunction::uniform_singletons(3).unwrap().monotone_checked());
        // a({1}) = 1.5, a({1,2}) = -0.5: ∂/∂x1 = 1.5 - 0.5 > 0, ∂/∂x2 = -0.5 when x2 < x1.
        let bad = SetFunction::new(2, [(0b01, 1.5), (0b11, -0.5)]).unwrap();
        assert!(!bad.monotone_checked());
        // Negative but dominated pair weight stays monotone.
        let ok = SetFunction::new(2, [(0b01, 0.6), (0b10, 0.6), (0b11, -0.2)]).unwrap();
        assert!(ok.monotone_checked());
        let big = SetFunction::uniform_singletons(6).unwrap();
        assert!(big.monotone_checked());
        let big_bad = SetFunction::new(6, [(0b1, 2.0), (0b11, -1.0)]).unwrap();
        assert!(!big_bad.monotone_checked());
    }

    #[test]
    fn exact_weights_use_decimal_values() {
        let a = SetFunction::new(3, [(0b001, 0.1), (0b010, 0.2), (0b111, 0.7)]).unwrap();
        let w = a.exact_weights();
        assert_eq!(w[0].1, q(1, 10));
        assert_eq!(w[1].1, q(1, 5));
        assert_eq!(w[2].1, q(7, 10));
        let thirds = SetFunction::new(3, (0..3).map(|i| (1u32 << i, 1.0 / 3.0))).unwrap();
        let sum = thirds.exact_weights().into_iter().fold(BigRational::zero(), |s, (_, w)| s + w);
        assert!(sum.is_one());
        assert_eq!(decimal_rational(-2.5e-3), q(-1, 400));
        assert_eq!(decimal_rational(1e22), BigRational::from_integer(num_traits::pow(BigInt::from(10), 22)));
    }
}
