use super::*;

fn tol() -> Tolerance {
    Tolerance::new(1e-11, 1e-12, 20_000_000).unwrap()
}

fn uniform() -> Distribution {
    Distribution::uniform(0.0, 1.0).unwrap()
}

fn close(got: f64, want: f64, eps: f64) {
    assert!((got - want).abs() <= eps, "got {got}, want {want} (|Δ| = {:e})", (got - want).abs());
}

fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

#[test]
fn expected_range_of_uniforms() {
    for n in 2..=5 {
        let r = expect_minmax_iid(|u, v| v - u, &uniform(), n, &tol()).unwrap();
        close(r.value, (n - 1) as f64 / (n + 1) as f64, 1e-10);
    }
}

#[test]
fn relative_range_first_moment() {
    for n in [2, 3, 5] {
        let r = expect_minmax_iid(|u, v| (v - u) / v, &uniform(), n, &tol()).unwrap();
        close(r.value, (n - 1) as f64 / n as f64, 1e-9);
    }
}

#[test]
fn total_probability() {
    let table = Distribution::table(vec![0.0, 0.3, 2.0], vec![0.0, 0.6, 1.0]).unwrap();
    let dists = [uniform(), Distribution::exponential(1.5).unwrap(), table];
    for d in &dists {
        for n in [2, 4] {
            let r = expect_minmax_iid(|_, _| 1.0, d, n, &tol()).unwrap();
            close(r.value, 1.0, 1e-9);
        }
    }
}

#[test]
fn quantile_path_matches_density_path() {
    let q_only = Distribution::from_cdf("u-quantile", Interval::unit(), |x| x.clamp(0.0, 1.0)).with_quantile(|p| p);
    for n in [2, 3] {
        let a = expect_minmax_iid(|u, v| v * v - u, &q_only, n, &tol()).unwrap();
        let b = expect_minmax_iid(|u, v| v * v - u, &uniform(), n, &tol()).unwrap();
        close(a.value, b.value, 1e-10);
    }
}

#[test]
fn missing_integration_path() {
    let bare = Distribution::from_cdf("bare", Interval::unit(), |x| x);
    assert!(matches!(
        expect_minmax_iid(|u, _| u, &bare, 2, &tol()),
        Err(ProbabilityError::NoIntegrationPath { .. })
    ));
    assert!(matches!(
        cdf_of_functional(|u, _| u, &bare, 2, 0.5, &tol()),
        Err(ProbabilityError::NoIntegrationPath { .. })
    ));
    assert!(matches!(
        expect_minmax_iid(|u, _| u, &uniform(), 1, &tol()),
        Err(ProbabilityError::TooFewVariables { n: 1 })
    ));
}

#[test]
fn exponential_order_statistics_on_the_density_path() {
    for rate in [0.5, 2.0] {
        let d = Distribution::exponential(rate).unwrap();
        for n in [2, 3] {
            let min = expect_minmax_iid(|u, _| u, &d, n, &tol()).unwrap();
            close(min.value, 1.0 / (n as f64 * rate), 1e-8);
            let max = expect_minmax_iid(|_, v| v, &d, n, &tol()).unwrap();
            close(max.value, harmonic(n) / rate, 1e-8);
        }
    }
}

#[test]
fn hetero_collapses_to_iid() {
    let d = vec![uniform(); 3];
    let a = expect_minmax_hetero(|u, v| v - u * u, &d, &tol()).unwrap();
    let b = expect_minmax_iid(|u, v| v - u * u, &uniform(), 3, &tol()).unwrap();
    close(a.value, b.value, 1e-10);
}

#[test]
fn hetero_sum_of_two_uniforms() {
    let r = expect_minmax_hetero(|u, v| u + v, &[uniform(), uniform()], &tol()).unwrap();
    close(r.value, 1.0, 1e-10);
}

#[test]
fn hetero_mean_absolute_difference() {
    // E|U - V| with U ~ U(0,1), V ~ U(0,2): ∫∫ |u - v| / 2 = 2/3 by direct
    // integration of the piecewise polynomial.
    let d = [uniform(), Distribution::uniform(0.0, 2.0).unwrap()];
    let r = expect_minmax_hetero(|u, v| v - u, &d, &tol()).unwrap();
    close(r.value, 2.0 / 3.0, 1e-10);
}

#[test]
fn hetero_mixed_supports() {
    // min of independent exponentials is exponential with the summed rate.
    let d = [Distribution::exponential(1.0).unwrap(), Distribution::exponential(3.0).unwrap()];
    let r = expect_minmax_hetero(|u, _| u, &d, &tol()).unwrap();
    close(r.value, 0.25, 1e-8);
    let d = [uniform(), Distribution::exponential(1.0).unwrap()];
    let r = expect_minmax_hetero(|_, _| 1.0, &d, &tol()).unwrap();
    close(r.value, 1.0, 1e-8);
}

#[test]
fn relative_range_cdf_numeric() {
    for n in [2, 3, 5] {
        for z in [0.1, 0.5, 0.9] {
            let r = cdf_of_functional(|u, v| (v - u) / v, &uniform(), n, z, &tol()).unwrap();
            close(r.value, z.powi(n as i32 - 1), 1e-9);
        }
    }
}

#[test]
fn cdf_of_the_maximum() {
    for z in [0.2, 0.7] {
        let r = cdf_of_functional(|_, v| v, &uniform(), 2, z, &tol()).unwrap();
        close(r.value, z * z, 1e-9);
    }
}

#[test]
fn cdf_limits_and_monotonicity() {
    let g = |u: f64, v: f64| (v - u) / v;
    close(cdf_of_functional(g, &uniform(), 3, -0.5, &tol()).unwrap().value, 0.0, 1e-15);
    close(cdf_of_functional(g, &uniform(), 3, 1.5, &tol()).unwrap().value, 1.0, 1e-9);
    let mut prev = -1.0;
    for i in 0..=20 {
        let z = -0.1 + 1.2 * i as f64 / 20.0;
        let c = cdf_of_functional(g, &uniform(), 3, z, &tol()).unwrap().value;
        assert!(c >= prev - 1e-9, "not monotone at z = {z}");
        prev = c;
    }
}

#[test]
fn cdf_with_two_cuts() {
    // n = 2: accepted u lie within s of v/2, a set of length min(v, 2s);
    // P = 2 ∫_0^1 min(v, 2s) dv = 0.36 for s = 0.1.
    let r = cdf_of_functional(|u, v| (u - 0.5 * v).powi(2), &uniform(), 2, 0.01, &tol()).unwrap();
    close(r.value, 0.36, 1e-8);
}

#[test]
fn cdf_on_exponential_support() {
    // max of two exponential(1) draws: P[max <= z] = (1 - e^{-z})^2.
    let d = Distribution::exponential(1.0).unwrap();
    for z in [0.3, 2.0] {
        let r = cdf_of_functional(|_, v| v, &d, 2, z, &tol()).unwrap();
        close(r.value, (1.0 - (-z).exp()).powi(2), 1e-8);
    }
}

#[test]
fn exponential_substitution_order_statistics() {
    for rate in [0.5, 1.0, 2.0] {
        for n in [2, 3] {
            let min = expect_minmax_exponential(|u, _| u, rate, n, &tol()).unwrap();
            close(min.value, 1.0 / (n as f64 * rate), 1e-8);
            let max = expect_minmax_exponential(|_, v| v, rate, n, &tol()).unwrap();
            close(max.value, harmonic(n) / rate, 1e-8);
            let one = expect_minmax_exponential(|_, _| 1.0, rate, n, &tol()).unwrap();
            close(one.value, 1.0, 1e-10);
        }
    }
    assert!(expect_minmax_exponential(|u, _| u, 0.0, 2, &tol()).is_err());
}

#[test]
fn exponential_substitution_matches_density_path_for_bounded_g() {
    let g = |u: f64, v: f64| (-(v - u)).exp() / (1.0 + u);
    let d = Distribution::exponential(1.3).unwrap();
    let a = expect_minmax_exponential(g, 1.3, 3, &tol()).unwrap();
    let b = expect_minmax_iid(g, &d, 3, &tol()).unwrap();
    close(a.value, b.value, 1e-9);
}

#[test]
fn relative_range_closed_forms() {
    let q = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
    assert_eq!(relative_range_moment(5, 0).unwrap(), q(1, 1));
    assert_eq!(relative_range_moment(3, 1).unwrap(), q(2, 3));
    assert_eq!(relative_range_moment(2, 2).unwrap(), q(1, 3));
    assert_eq!(relative_range_cdf(3, 0.5).unwrap(), 0.25);
    assert_eq!(relative_range_cdf(3, -1.0).unwrap(), 0.0);
    assert_eq!(relative_range_cdf(3, 2.0).unwrap(), 1.0);
    assert!(relative_range_moment(1, 1).is_err());
}
