use super::*;
use crate::reduction::InnerStrategy;

fn unit() -> Interval {
    Interval::unit()
}

fn tol() -> Tolerance {
    Tolerance::new(1e-10, 1e-12, 50_000_000).unwrap()
}

fn grid() -> InnerStrategy {
    InnerStrategy::TensorGrid { points_per_axis: 6 }
}

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn close(got: f64, want: f64, eps: f64) {
    assert!((got - want).abs() <= eps, "got {got}, want {want} (|Δ| = {:e})", (got - want).abs());
}

#[test]
fn choquet_examples() {
    let min = SetFunction::new(2, [(0b11, 1.0)]).unwrap();
    assert_eq!(choquet_eval(&min, &[0.3, 0.7]).unwrap(), 0.3);
    let mean = SetFunction::new(2, [(0b01, 0.5), (0b10, 0.5)]).unwrap();
    assert_eq!(choquet_eval(&mean, &[0.3, 0.7]).unwrap(), 0.5);
    let mixed = SetFunction::new(2, [(0b01, 0.2), (0b10, 0.3), (0b11, 0.5)]).unwrap();
    close(choquet_eval(&mixed, &[0.4, 0.8]).unwrap(), 0.52, 1e-15);
    assert!(matches!(choquet_eval(&mixed, &[0.4]), Err(AggregationError::DimensionMismatch { expected: 2, got: 1 })));
}

#[test]
fn distribution_functions() {
    let min = InternalFunction::minimum(3, unit()).unwrap();
    let max = InternalFunction::maximum(3, unit()).unwrap();
    assert_eq!(odf(&min, &[0.2, 0.9, 0.5]).unwrap(), 0.0);
    assert_eq!(odf(&max, &[0.2, 0.9, 0.5]).unwrap(), 1.0);
    let gm = InternalFunction::geometric_mean(2, unit()).unwrap();
    close(odf(&gm, &[0.25, 1.0]).unwrap(), 1.0 / 3.0, 1e-15);
    close(adf(&gm, &[0.25, 1.0]).unwrap(), 2.0 / 3.0, 1e-15);
    assert!(matches!(odf(&gm, &[0.5, 0.5]), Err(AggregationError::DiagonalInput { .. })));
}

#[test]
fn idempotency_distribution_function() {
    let min = ConjunctiveFunction::minimum(2, unit()).unwrap();
    assert_eq!(idf(&min, &[0.3, 0.8], unit()).unwrap(), 1.0);
    let zero = ConjunctiveFunction::new(AggFn::new(2, "zero", true, |_: &[f64]| 0.0).unwrap(), unit()).unwrap();
    assert_eq!(idf(&zero, &[0.3, 0.8], unit()).unwrap(), 0.0);
    let prod = ConjunctiveFunction::product(2, unit()).unwrap();
    close(idf(&prod, &[0.5, 0.5], unit()).unwrap(), 0.5, 1e-15);
    assert!(matches!(idf(&prod, &[0.0, 0.5], unit()), Err(AggregationError::BoundaryInput { .. })));
    let max = DisjunctiveFunction::maximum(2, unit()).unwrap();
    assert_eq!(idf(&max, &[0.3, 0.8], unit()).unwrap(), 1.0);
    assert!(matches!(idf(&max, &[0.3, 1.0], unit()), Err(AggregationError::BoundaryInput { .. })));
}

#[test]
fn spot_checks_reject_wrong_classes() {
    let prod = AggFn::new(2, "product", true, |x: &[f64]| x[0] * x[1]).unwrap();
    assert!(matches!(InternalFunction::new(prod.clone(), unit()), Err(AggregationError::PropertyViolated { .. })));
    assert!(DisjunctiveFunction::new(prod.clone(), unit()).is_err());
    assert!(ConjunctiveFunction::new(prod, unit()).is_ok());
    assert!(ConjunctiveFunction::product(2, Interval::new(0.0, 2.0).unwrap()).is_err());
    assert!(InternalFunction::geometric_mean(2, Interval::new(-1.0, 1.0).unwrap()).is_err());
}

#[test]
fn orness_of_the_arithmetic_mean() {
    for n in 2..=4 {
        let am = InternalFunction::arithmetic_mean(n, unit()).unwrap();
        let r = orness_average_numeric(&am, unit(), &tol(), &grid()).unwrap();
        close(r.value, 0.5, 1e-9);
    }
}

#[test]
fn orness_of_the_geometric_mean_numeric_n2() {
    let gm = InternalFunction::geometric_mean(2, unit()).unwrap();
    let r = orness_average_numeric(&gm, unit(), &tol(), &grid()).unwrap();
    close(r.value, 4f64.ln() - 1.0, 1e-9);
}

#[test]
fn orness_geometric_closed_forms() {
    let pi = std::f64::consts::PI;
    let s5 = 5f64.sqrt();
    let expected = [
        4f64.ln() - 1.0,
        3f64.sqrt() * pi / 2.0 - 47.0 / 20.0,
        96.0 * 2f64.ln() / 25.0 - 8837.0 / 3850.0,
        25.0 * pi / 27.0 * (2.5 * (25.0 - 11.0 * s5)).sqrt() - 2454487.0 / 960336.0,
    ];
    for (n, want) in (2..=5).zip(expected) {
        close(orness_average_geometric(n).unwrap(), want, 1e-12);
    }
    assert!(orness_average_geometric(1).is_err());
}

#[test]
fn orness_geometric_numeric_path_agrees_for_n3() {
    let gm = InternalFunction::geometric_mean(3, unit()).unwrap();
    let strategy = InnerStrategy::TensorGrid { points_per_axis: 24 };
    let r = orness_average_numeric(&gm, unit(), &Tolerance::new(1e-9, 1e-11, 50_000_000).unwrap(), &strategy).unwrap();
    close(r.value, orness_average_geometric(3).unwrap(), 1e-7);
}

#[test]
fn choquet_closed_forms() {
    assert_eq!(orness_average_choquet(&SetFunction::minimum(4).unwrap()).unwrap(), q(0, 1));
    let thirds = SetFunction::uniform_singletons(3).unwrap();
    assert_eq!(orness_average_choquet(&thirds).unwrap(), q(1, 2));
    assert_eq!(global_orness_choquet(&thirds).unwrap(), q(1, 2));
    let mixed = SetFunction::new(2, [(0b01, 0.2), (0b10, 0.3), (0b11, 0.5)]).unwrap();
    assert_eq!(orness_average_choquet(&mixed).unwrap(), q(1, 4));
    assert_eq!(global_orness_choquet(&mixed).unwrap(), q(1, 4));
    assert!(orness_average_choquet(&SetFunction::minimum(1).unwrap()).is_err());
}

#[test]
fn choquet_numeric_matches_closed_form() {
    let mixed = SetFunction::new(3, [(0b001, 0.25), (0b110, 0.35), (0b111, 0.1), (0b010, 0.3)]).unwrap();
    let f = InternalFunction::choquet(&mixed, unit()).unwrap();
    assert!(!f.as_agg().is_symmetric());
    let r = orness_average_numeric(&f, unit(), &tol(), &grid()).unwrap();
    close(r.value, to_f64(&orness_average_choquet(&mixed).unwrap()), 1e-8);
    let g = global_orness(&f, unit(), &tol(), &grid()).unwrap();
    close(g.value, to_f64(&global_orness_choquet(&mixed).unwrap()), 1e-8);

    let half = SetFunction::new(2, [(0b01, 0.5), (0b10, 0.5)]).unwrap();
    let f = InternalFunction::choquet(&half, unit()).unwrap();
    assert!(f.as_agg().is_symmetric());
    let r = orness_average_numeric(&f, unit(), &tol(), &grid()).unwrap();
    close(r.value, 0.5, 1e-9);
}

#[test]
fn choquet_orness_is_domain_free() {
    let a = SetFunction::new(3, [(0b011, 0.4), (0b100, 0.6)]).unwrap();
    let d = Interval::new(-1.0, 3.0).unwrap();
    let f = InternalFunction::choquet(&a, d).unwrap();
    let r = orness_average_numeric(&f, d, &tol(), &grid()).unwrap();
    close(r.value, to_f64(&orness_average_choquet(&a).unwrap()), 1e-8);
}

#[test]
fn global_orness_examples() {
    let am = InternalFunction::arithmetic_mean(3, unit()).unwrap();
    close(global_orness(&am, unit(), &tol(), &grid()).unwrap().value, 0.5, 1e-9);
    for n in [2, 3] {
        let gm = InternalFunction::geometric_mean(n, unit()).unwrap();
        let strategy = InnerStrategy::TensorGrid { points_per_axis: 24 };
        let r = global_orness(&gm, unit(), &tol(), &strategy).unwrap();
        close(r.value, global_orness_geometric(n).unwrap(), 1e-8);
    }
    close(global_orness_geometric(2).unwrap(), 1.0 / 3.0, 1e-15);
}

#[test]
fn orness_and_andness_are_dual() {
    let d = Interval::new(0.5, 2.0).unwrap();
    let fs = [
        InternalFunction::arithmetic_mean(3, d).unwrap(),
        InternalFunction::geometric_mean(2, d).unwrap(),
        InternalFunction::minimum(3, d).unwrap(),
        InternalFunction::maximum(2, d).unwrap(),
    ];
    for f in &fs {
        let o = orness_average_numeric(f, d, &tol(), &grid()).unwrap();
        let a = andness_average_numeric(f, d, &tol(), &grid()).unwrap();
        close(o.value + a.value, 1.0, 1e-9 + o.abs_error + a.abs_error);
    }
}

#[test]
fn idempotency_of_min_and_product() {
    for n in 1..=4 {
        let min = ConjunctiveFunction::minimum(n, unit()).unwrap();
        close(idempotency_average_numeric(&min, unit(), &tol(), &grid()).unwrap().value, 1.0, 1e-9);
        close(global_idempotency(&min, unit(), &tol(), &grid()).unwrap().value, 1.0, 1e-9);
    }
    for (n, want) in [(2, 2.0 / 3.0), (3, 0.4)] {
        let prod = ConjunctiveFunction::product(n, unit()).unwrap();
        close(idempotency_average_numeric(&prod, unit(), &tol(), &grid()).unwrap().value, want, 1e-9);
    }
    let prod = ConjunctiveFunction::product(2, unit()).unwrap();
    close(global_idempotency(&prod, unit(), &tol(), &grid()).unwrap().value, 0.75, 1e-9);
}

#[test]
fn product_closed_forms() {
    assert_eq!(idempotency_average_product(1).unwrap(), q(1, 1));
    assert_eq!(idempotency_average_product(2).unwrap(), q(2, 3));
    assert_eq!(idempotency_average_product(3).unwrap(), q(2, 5));
    assert_eq!(idempotency_average_product(4).unwrap(), q(8, 35));
    assert_eq!(global_idempotency_product(2).unwrap(), q(3, 4));
    assert_eq!(global_idempotency_product(3).unwrap(), q(1, 2));
    assert_eq!(format_rational(&q(8, 35)), "8/35");
    assert_eq!(format_rational(&q(4, 2)), "2");
}

#[test]
fn product_kernel_matches_grid() {
    let prod = ConjunctiveFunction::product(4, unit()).unwrap();
    let a = idempotency_average_numeric(&prod, unit(), &tol(), &product_idf_kernel(4, unit())).unwrap();
    let b = idempotency_average_numeric(&prod, unit(), &tol(), &grid()).unwrap();
    close(a.value, to_f64(&idempotency_average_product(4).unwrap()), 1e-9);
    close(a.value, b.value, 1e-9);
}

#[test]
fn disjunctive_mirror_of_the_product() {
    // (1 - F)/(1 - max) = 1 - min for the probabilistic sum of two inputs.
    let s = DisjunctiveFunction::probabilistic_sum(2, unit()).unwrap();
    close(idempotency_average_numeric(&s, unit(), &tol(), &grid()).unwrap().value, 2.0 / 3.0, 1e-9);
    close(global_idempotency(&s, unit(), &tol(), &grid()).unwrap().value, 0.75, 1e-9);
    let max = DisjunctiveFunction::maximum(3, unit()).unwrap();
    close(idempotency_average_numeric(&max, unit(), &tol(), &grid()).unwrap().value, 1.0, 1e-9);
}

#[test]
fn non_symmetric_conjunctive_function() {
    // F = x_1 x_2^2 on [0,1]^2: idf = x_2^2 on {x_1 < x_2}, x_1 x_2 on
    // {x_2 < x_1}, so the average is 1/4 + 1/8 = 3/8.
    let f = ConjunctiveFunction::new(AggFn::new(2, "x1*x2^2", false, |x: &[f64]| x[0] * x[1] * x[1]).unwrap(), unit()).unwrap();
    close(idempotency_average_numeric(&f, unit(), &tol(), &grid()).unwrap().value, 3.0 / 8.0, 1e-9);
}
