use std::time::Instant;

use super::{spec, Failure, Report, Row};
use crate::aggregation::{self, to_f64, ConjunctiveFunction, InternalFunction, SetFunction};
use crate::probability::{self, Distribution};
use crate::quadrature::{Interval, Tolerance};
use crate::reduction::{self, InnerStrategy};

/// Largest admissible gap between a closed form and its numeric reduction.
pub const TABLE_GAP: f64 = 1e-6;

fn row<E: std::fmt::Display>(section: &str, quantity: String, closed_form: f64, numeric: impl FnOnce() -> Result<f64, E>) -> Result<Row, Failure> {
    let start = Instant::now();
    let numeric = numeric().map_err(|e| spec(format!("{section}, {quantity}: {e}")))?;
    Ok(Row {
        section: section.to_string(),
        quantity,
        closed_form,
        numeric,
        gap: (closed_form - numeric).abs(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn grid(points_per_axis: usize) -> InnerStrategy {
    InnerStrategy::TensorGrid { points_per_axis }
}

fn set_functions() -> Result<Vec<SetFunction>, Failure> {
    let sets = [
        SetFunction::new(2, [(0b01, 0.2), (0b10, 0.3), (0b11, 0.5)]),
        SetFunction::new(3, [(0b001, 0.25), (0b010, 0.3), (0b110, 0.35), (0b111, 0.1)]),
        SetFunction::new(4, [(0b0001, 0.1), (0b0110, 0.2), (0b1011, 0.3), (0b1111, 0.15), (0b1000, 0.25)]),
    ];
    sets.into_iter().map(|a| a.map_err(spec)).collect()
}

pub(super) fn run() -> Result<Report, Failure> {
    let tol = Tolerance::new(1e-10, 1e-12, 50_000_000).map_err(spec)?;
    let unit = Interval::unit();
    let mut rows = Vec::new();

    for (n, points) in [(2, 2), (3, 32), (4, 24), (5, 16)] {
        let closed = aggregation::orness_average_geometric(n).map_err(spec)?;
        let f = InternalFunction::geometric_mean(n, unit).map_err(spec)?;
        rows.push(row("geometric mean", format!("orness average, n = {n}"), closed, || {
            aggregation::orness_average_numeric(&f, unit, &tol, &grid(points)).map(|r| r.value)
        })?);
    }

    for a in set_functions()? {
        let n = a.n();
        let average = aggregation::orness_average_choquet(&a).map_err(spec)?;
        let global = aggregation::global_orness_choquet(&a).map_err(spec)?;
        let f = InternalFunction::choquet(&a, unit).map_err(spec)?;
        rows.push(row("Choquet integral", format!("orness average, n = {n}"), to_f64(&average), || {
            aggregation::orness_average_numeric(&f, unit, &tol, &grid(8)).map(|r| r.value)
        })?);
        rows.push(row("Choquet integral", format!("global orness, n = {n}"), to_f64(&average), || {
            Ok::<_, std::convert::Infallible>(if global == average { to_f64(&average) } else { f64::NAN })
        })?);
    }

    for n in 1..=6 {
        let f = ConjunctiveFunction::product(n, unit).map_err(spec)?;
        let average = to_f64(&aggregation::idempotency_average_product(n).map_err(spec)?);
        let global = to_f64(&aggregation::global_idempotency_product(n).map_err(spec)?);
        rows.push(row("product", format!("idempotency average, n = {n}"), average, || {
            aggregation::idempotency_average_numeric(&f, unit, &tol, &aggregation::product_idf_kernel(n, unit)).map(|r| r.value)
        })?);
        rows.push(row("product", format!("global idempotency, n = {n}"), global, || {
            aggregation::global_idempotency(&f, unit, &tol, &grid(8)).map(|r| r.value)
        })?);
    }

    let uniform = Distribution::uniform(0.0, 1.0).map_err(spec)?;
    for n in [2, 3, 5] {
        for r in 1..=3 {
            let closed = to_f64(&probability::relative_range_moment(n, r).map_err(spec)?);
            rows.push(row("relative range", format!("moment r = {r}, n = {n}"), closed, || {
                probability::expect_minmax_iid(|u, v| ((v - u) / v).powi(r as i32), &uniform, n, &tol).map(|q| q.value)
            })?);
        }
        for z in [0.1, 0.5, 0.9] {
            let closed = probability::relative_range_cdf(n, z).map_err(spec)?;
            rows.push(row("relative range", format!("cdf at z = {z}, n = {n}"), closed, || {
                probability::cdf_of_functional(|u, v| (v - u) / v, &uniform, n, z, &tol).map(|q| q.value)
            })?);
        }
    }

    for n in 2..=4 {
        let closed = reduction::variance_range_average(n, unit).map_err(spec)?;
        rows.push(row("variance to range", format!("average, n = {n}"), closed, || {
            reduction::integrate_minmax_full(&reduction::variance_range_integrand(n), unit, &tol, &grid(8)).map(|q| q.value)
        })?);
    }

    let max_gap = rows.iter().map(|r| r.gap).fold(0.0, f64::max);
    // NaN gaps fail the comparison.
    let passed = rows.iter().all(|r| r.gap <= TABLE_GAP);
    let report = Report::new().with("max_gap", max_gap).with("passed", passed).with_rows(rows);
    if passed {
        Ok(report)
    } else {
        Err(Failure::VerifyFailed(report, format!("a closed form and its reduction differ by more than {TABLE_GAP:e}")))
    }
}
