//! Fixed quadrature rules: the 7/15-point Gauss–Kronrod pair used by the
//! adaptive engine and Gauss–Legendre rules of arbitrary order for tensor
//! products.

/// Kronrod abscissae on (-1, 1), positive half, descending; the last entry is
/// the centre. Odd indices are shared with the 7-point Gauss rule.
pub(crate) const GK15_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

pub(crate) const GK15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the nodes `GK15_NODES[1], [3], [5]` and the centre.
pub(crate) const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Kronrod and Gauss estimates on one panel, plus the 15 evaluations it took.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PanelEstimate {
    pub kronrod: f64,
    pub gauss: f64,
}

/// Apply the G7/K15 pair on `[a, b]`. Every node is strictly interior.
pub(crate) fn gk15<F, E>(f: &mut F, a: f64, b: f64) -> Result<PanelEstimate, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(centre)?;
    let mut kronrod = fc * GK15_WEIGHTS[7];
    let mut gauss = fc * G7_WEIGHTS[3];

    for (i, (&x, &w)) in GK15_NODES[..7].iter().zip(&GK15_WEIGHTS[..7]).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx)? + f(centre + dx)?;
        kronrod += w * pair;
        if i % 2 == 1 {
            gauss += G7_WEIGHTS[i / 2] * pair;
        }
    }

    Ok(PanelEstimate {
        kronrod: kronrod * half,
        gauss: gauss * half,
    })
}

/// A Gauss–Legendre rule on (-1, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Build the `points`-node rule by Newton iteration on the Legendre
    /// recurrence. Nodes are returned in ascending order.
    pub fn new(points: usize) -> Self {
        assert!(points > 0, "a Gauss-Legendre rule needs at least one node");
        let n = points;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess for the i-th largest root.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut deriv = 0.0;
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                deriv = dp;
                let step = p / dp;
                x -= step;
                if step.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            if dp != 0.0 {
                deriv = dp;
            }
            let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for p in 1..40 {
            let rule = GaussLegendre::new(p);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "p = {p}: {s}");
        }
    }

    #[test]
    fn gauss_legendre_exact_to_degree_2p_minus_1() {
        for p in 1..20 {
            let rule = GaussLegendre::new(p);
            for deg in 0..(2 * p) {
                let approx: f64 = rule.mapped(0.0, 1.0).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = 1.0 / (deg as f64 + 1.0);
                assert!((approx - exact).abs() < 1e-13, "p={p} deg={deg}");
            }
        }
    }

    #[test]
    fn three_point_rule_matches_known_nodes() {
        let rule = GaussLegendre::new(3);
        let r = (0.6f64).sqrt();
        assert!((rule.nodes[0] + r).abs() < 1e-15);
        assert_eq!(rule.nodes[1], 0.0);
        assert!((rule.weights[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn gk15_integrates_degree_22_polynomial() {
        let mut f = |x: f64| Ok::<_, ()>(x.powi(22));
        let est = gk15(&mut f, 0.0, 1.0).unwrap();
        assert!((est.kronrod - 1.0 / 23.0).abs() < 1e-15);
    }
}
