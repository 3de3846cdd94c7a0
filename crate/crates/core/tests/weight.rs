use approx::assert_relative_eq;
use invasionlab_core::weight::{chi_minus, chi_plus, weighted_norm};
use invasionlab_core::{Grid, NormKind, Weight};
use proptest::prelude::*;

#[test]
fn exact_exponential_tails() {
    assert_relative_eq!(Weight::omega0(0.45).eval(-5.0), 1.0);
    assert_relative_eq!(Weight::new(0.0, 0.5).eval(2.0), 1f64.exp(), max_relative = 1e-14);
    assert_relative_eq!(Weight::new(0.2, 0.0).eval(-10.0), (-2f64).exp(), max_relative = 1e-14);
}

#[test]
fn partition_of_unity() {
    assert_eq!(chi_minus(-2.0), 1.0);
    assert_eq!(chi_minus(1.0), 0.0);
    let mid = chi_minus(-0.5);
    assert!(mid > 0.0 && mid < 1.0);
    let xs: Vec<f64> = (0..=400).map(|i| -2.0 + 0.01 * i as f64).collect();
    for w in xs.windows(2) {
        assert!(chi_minus(w[1]) <= chi_minus(w[0]));
    }
    for &x in &xs {
        assert_eq!(chi_minus(x) + chi_plus(x), 1.0);
    }
}

#[test]
fn norms() {
    let g = Grid::with_spacing(-10.0, 10.0, 0.01).unwrap();
    assert_eq!(weighted_norm(&vec![0.0; g.n], &g, &Weight::UNIT, NormKind::Sup), 0.0);
    assert_eq!(weighted_norm(&vec![1.0; g.n], &g, &Weight::UNIT, NormKind::Sup), 1.0);
    let gauss: Vec<f64> = g.xs().iter().map(|x| (-x * x).exp()).collect();
    // ∫ e^{−2x²} dx = √(π/2)
    let want = (std::f64::consts::PI / 2.0).powf(0.25);
    assert!((weighted_norm(&gauss, &g, &Weight::UNIT, NormKind::L2) - want).abs() < 1e-4);
}

proptest! {
    #[test]
    fn monotone_when_rates_share_sign(em in 0.0f64..1.0, ep in 0.0f64..1.0, x in -3.0f64..3.0) {
        let w = Weight::new(em, ep);
        prop_assert!(w.eval(x + 1e-3) >= w.eval(x));
    }

    #[test]
    fn shift_ratio_bounded(eta in 0.0f64..1.0, x in -20.0f64..20.0, y in -20.0f64..20.0) {
        // ω(ξ)/ω(ξ+y) ≤ C e^{η|y|} with C = 1 for a common rate
        let w = Weight::new(eta, eta);
        prop_assert!(w.eval(x) / w.eval(x + y) <= (eta * y.abs()).exp() * (1.0 + 1e-12));
    }
}
