use exactborn::lemma_lab::*;
use exactborn::linalg::c;
use proptest::prelude::*;

fn shape() -> impl Strategy<Value = SampleShape> {
    prop_oneof![Just(SampleShape::Gaussian), Just(SampleShape::Exponential)]
}

fn grid_momentum(lo: i32, hi: i32) -> impl Strategy<Value = f64> {
    (lo..hi).prop_map(|j| j as f64 * LINE_DP)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn edges_are_monotone(alpha in grid_momentum(-20, 20), gap in grid_momentum(0, 15), s in shape(), seed in any::<u64>()) {
        let f = make_salpha_sample(alpha, alpha + gap, s, seed).unwrap();
        prop_assert!(f.leak_below(alpha) < LEAK_TOL);
        prop_assert!(f.leak_below(alpha - 1.0) < LEAK_TOL);
        prop_assert!(f.support_edge(LEAK_TOL).unwrap() >= alpha + gap - 1e-9);
    }

    #[test]
    fn projection_lands_above_minus_k(beta in grid_momentum(-40, 40), k in 0.1f64..4.0, s in shape(), seed in any::<u64>()) {
        let f = make_salpha_sample(beta, beta, s, seed).unwrap();
        prop_assert_eq!(f.project(k).leak_below(-k), 0.0);
        if k <= beta {
            prop_assert_eq!(f.project(k).max_abs(), 0.0);
        }
    }

    #[test]
    fn products_clear_twice_the_threshold(alpha in grid_momentum(0, 15), g1 in grid_momentum(0, 8), g2 in grid_momentum(0, 8), s in shape(), seed in any::<u64>()) {
        let f1 = make_salpha_sample(alpha, alpha + g1, s, seed).unwrap();
        let f2 = make_salpha_sample(alpha, alpha + g2, SampleShape::Gaussian, seed ^ 1).unwrap();
        let r = product_support_check(&f1, &f2, alpha);
        prop_assert!(r.pass, "{:?}", r);
        let r = bounded_product_check(&f1, |p| c((0.7 * p).sin(), 1.0), alpha);
        prop_assert!(r.pass, "{:?}", r);
    }

    // Powers of eta march up the line; small |eta| keeps the series tail inside the window.
    #[test]
    fn reciprocals_stay_one_sided(alpha in grid_momentum(0, 6), gap in grid_momentum(1, 8), size in 0.05f64..0.3, seed in any::<u64>()) {
        let eta = make_salpha_sample(alpha, alpha + gap, SampleShape::Gaussian, seed).unwrap();
        let sup = eta.to_space().iter().map(|v| v.norm()).fold(0.0, f64::max);
        let eta = eta.scaled(c(size / sup, 0.0));
        let g = make_salpha_sample(alpha, alpha, SampleShape::Exponential, seed ^ 7).unwrap();
        let r = reciprocal_support_check(&eta, alpha, Some(&g)).unwrap();
        prop_assert!(r.pass, "{:?}", r);
        prop_assert_eq!(r.series.len(), 5);
    }

    #[test]
    fn convolutions_add_thresholds(a in -8i32..8, b in 0i32..8, seed in any::<u64>()) {
        let r = convolution_support_check(a as f64 * PLANE_DP, b as f64 * PLANE_DP, seed).unwrap();
        prop_assert!(r.pass, "{:?}", r);
    }
}
