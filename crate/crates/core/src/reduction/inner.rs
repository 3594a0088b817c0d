//! Rules for the inner integral over a cube `(lo, hi)^m` of free coordinates.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ReductionError;
use crate::quadrature::GaussLegendre;

/// Largest inner dimension the deterministic grid accepts.
pub const MAX_GRID_DIMENSION: usize = 4;

const MC_BATCHES: usize = 16;

/// Closed-form inner integral: `(lo, hi) ↦ ∫_{(lo,hi)^m} f`.
pub type InnerKernel = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// How the inner integral over the free coordinates is evaluated.
#[derive(Clone)]
pub enum InnerStrategy {
    /// The caller supplies the inner integral as a function of the inner
    /// cube's corners. For `integrate_min` the corners are `(u, b)`, for
    /// `integrate_max` they are `(a, v)`, for the min-max forms `(u, v)`.
    /// Only available for symmetric integrands.
    ClosedKernel(InnerKernel),
    /// Gauss–Legendre product rule on each order cell
    /// `lo < y_1 < … < y_m < hi` of the inner cube. Exact for integrands that
    /// are polynomial on every order cell (sums of minima, products, …);
    /// limited to `m <= 4`.
    TensorGrid { points_per_axis: usize },
    /// Plain Monte Carlo with common random numbers: the same unit-cube
    /// samples are mapped into every inner cube, so the outer quadrature sees
    /// a smooth integrand. Results carry a standard error across batches.
    MonteCarlo { samples: usize, seed: u64 },
}

impl InnerStrategy {
    pub fn closed_kernel<K>(kernel: K) -> Self
    where
        K: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        InnerStrategy::ClosedKernel(Arc::new(kernel))
    }

    pub fn tensor_grid() -> Self {
        InnerStrategy::TensorGrid { points_per_axis: 10 }
    }
}

impl fmt::Debug for InnerStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InnerStrategy::ClosedKernel(_) => f.write_str("ClosedKernel(..)"),
            InnerStrategy::TensorGrid { points_per_axis } => {
                f.debug_struct("TensorGrid").field("points_per_axis", points_per_axis).finish()
            }
            InnerStrategy::MonteCarlo { samples, seed } => {
                f.debug_struct("MonteCarlo").field("samples", samples).field("seed", seed).finish()
            }
        }
    }
}

/// A fixed rule on the unit cube `(0, 1)^m`; mapped affinely onto each
/// inner cube.
#[derive(Debug, Clone)]
pub(crate) struct CubeRule {
    dim: usize,
    /// Flattened node coordinates, `dim` per node.
    points: Vec<f64>,
    weights: Vec<f64>,
    /// Coordinate orderings to sum over; empty means use the node as is.
    permutations: Vec<Vec<usize>>,
    /// Multiplier applied to the sum (m! when one order cell stands in for all).
    multiplicity: f64,
}

impl CubeRule {
    /// Gauss–Legendre product rule on the order cell `0 < y_1 < … < y_m < 1`.
    pub(crate) fn order_cell(dim: usize, points_per_axis: usize, symmetric: bool) -> Result<Self, ReductionError> {
        if dim > MAX_GRID_DIMENSION {
            return Err(ReductionError::StrategyUnavailable(format!(
                "tensor grid supports inner dimension <= {MAX_GRID_DIMENSION}, got {dim}"
            )));
        }
        if points_per_axis == 0 {
            return Err(ReductionError::StrategyUnavailable("tensor grid needs at least one point per axis".into()));
        }
        let rule = GaussLegendre::new(points_per_axis);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let mut y = vec![0.0; dim];
        simplex_nodes(&rule, 0, 0.0, 1.0, &mut y, &mut points, &mut weights);

        let (permutations, multiplicity) = if symmetric || dim < 2 {
            (Vec::new(), factorial(dim))
        } else {
            (all_permutations(dim), 1.0)
        };
        Ok(Self {
            dim,
            points,
            weights,
            permutations,
            multiplicity,
        })
    }

    /// Uniform samples on the cube, one rule per batch.
    pub(crate) fn monte_carlo_batches(dim: usize, samples: usize, seed: u64) -> Result<Vec<Self>, ReductionError> {
        if samples == 0 {
            return Err(ReductionError::StrategyUnavailable("Monte Carlo needs at least one sample".into()));
        }
        let batches = MC_BATCHES.min(samples);
        let per_batch = samples / batches;
        Ok((0..batches)
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b as u64);
                let points: Vec<f64> = (0..per_batch * dim).map(|_| rng.random::<f64>()).collect();
                Self {
                    dim,
                    points,
                    weights: vec![1.0 / per_batch as f64; per_batch],
                    permutations: Vec::new(),
                    multiplicity: 1.0,
                }
            })
            .collect())
    }

    /// `∫_{(lo,hi)^m} eval(free) d free`.
    pub(crate) fn integrate<E>(&self, lo: f64, hi: f64, free: &mut [f64], mut eval: E) -> f64
    where
        E: FnMut(&[f64]) -> f64,
    {
        debug_assert_eq!(free.len(), self.dim);
        if self.dim == 0 {
            return eval(free);
        }
        let width = hi - lo;
        let volume = width.powi(self.dim as i32);
        let mut sum = 0.0;
        for (node, &w) in self.points.chunks_exact(self.dim).zip(&self.weights) {
            if self.permutations.is_empty() {
                for (slot, &t) in free.iter_mut().zip(node) {
                    *slot = lo + width * t;
                }
                sum += w * eval(free);
            } else {
                for perm in &self.permutations {
                    for (&target, &t) in perm.iter().zip(node) {
                        free[target] = lo + width * t;
                    }
                    sum += w * eval(free);
                }
            }
        }
        sum * volume * self.multiplicity
    }

    pub(crate) fn evaluations_per_call(&self) -> usize {
        if self.dim == 0 {
            1
        } else {
            self.weights.len() * self.permutations.len().max(1)
        }
    }
}

// Nested Gauss–Legendre on lo < y_k < … < y_m < 1: each coordinate ranges
// over (previous, 1).
fn simplex_nodes(
    rule: &GaussLegendre,
    level: usize,
    lower: f64,
    weight: f64,
    y: &mut [f64],
    points: &mut Vec<f64>,
    weights: &mut Vec<f64>,
) {
    if level == y.len() {
        points.extend_from_slice(y);
        weights.push(weight);
        return;
    }
    let nodes: Vec<(f64, f64)> = rule.mapped(lower, 1.0).collect();
    for (x, w) in nodes {
        y[level] = x;
        simplex_nodes(rule, level + 1, x, weight * w, y, points, weights);
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// All permutations of `0..k` in lexicographic order.
pub(crate) fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..k).collect();
    let mut out = vec![current.clone()];
    // Narayana's next-permutation.
    loop {
        let Some(i) = (1..k).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..k).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}
