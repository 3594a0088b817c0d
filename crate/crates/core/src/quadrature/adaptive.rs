//! Globally adaptive bisection driven by the G7/K15 pair.

use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::rules::gk15;
use super::{Level, QuadError, QuadResult, Tolerance};

/// Evaluation budget shared by every level of a nested integration.
#[derive(Debug)]
pub(crate) struct Budget {
    used: Cell<usize>,
    limit: usize,
}

impl Budget {
    pub(crate) fn new(limit: usize) -> Self {
        Self {
            used: Cell::new(0),
            limit,
        }
    }

    pub(crate) fn charge(&self, evals: usize) {
        self.used.set(self.used.get().saturating_add(evals));
    }

    pub(crate) fn used(&self) -> usize {
        self.used.get()
    }

    pub(crate) fn exhausted(&self) -> bool {
        self.used.get() >= self.limit
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

// Max-heap on error; ties broken on position so the refinement order is
// fully determined by the integrand.
impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

const NODES_PER_PANEL: usize = 15;

fn evaluate<F>(f: &mut F, a: f64, b: f64, level: Level, budget: &Budget) -> Result<Panel, QuadError>
where
    F: FnMut(f64) -> Result<f64, QuadError>,
{
    let mut checked = |x: f64| -> Result<f64, QuadError> {
        let y = f(x)?;
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadError::NonFiniteEvaluation { at: x, value: y, level })
        }
    };
    let est = gk15(&mut checked, a, b)?;
    budget.charge(NODES_PER_PANEL);
    Ok(Panel {
        a,
        b,
        value: est.kronrod,
        error: (est.kronrod - est.gauss).abs(),
    })
}

fn splittable(p: &Panel) -> bool {
    let mid = 0.5 * (p.a + p.b);
    mid > p.a && mid < p.b && (p.b - p.a) > 8.0 * f64::EPSILON * p.a.abs().max(p.b.abs())
}

/// Integrate `f` over the finite interval `[a, b]`.
///
/// Hard failures (non-finite values, errors raised by `f`) are returned as
/// `Err`; running out of budget is not an error here and is reported through
/// `converged = false`.
pub(crate) fn adaptive<F>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: &Tolerance,
    level: Level,
    budget: &Budget,
) -> Result<QuadResult, QuadError>
where
    F: FnMut(f64) -> Result<f64, QuadError>,
{
    let start = budget.used();
    let first = evaluate(f, a, b, level, budget)?;
    let mut total = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel> = Vec::new();
    heap.push(first);

    let converged = loop {
        if tol.accepts(total, error) {
            break true;
        }
        if budget.exhausted() {
            break false;
        }
        let Some(worst) = heap.pop() else {
            break false;
        };
        if !splittable(&worst) {
            frozen.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let left = evaluate(f, worst.a, mid, level, budget)?;
        let right = evaluate(f, mid, worst.b, level, budget)?;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    };

    // Final sums in left-to-right order; the running totals above carry
    // cancellation noise from repeated add/subtract.
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(frozen);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let abs_error: f64 = panels.iter().map(|p| p.error).sum();
    let converged = converged && tol.accepts(value, abs_error);

    Ok(QuadResult {
        value,
        abs_error,
        evaluations: budget.used() - start,
        converged,
        stochastic: false,
    })
}
