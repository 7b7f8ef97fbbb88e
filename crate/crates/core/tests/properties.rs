//! Property-based invariants tying the functionals together.

use bmolab_core::*;
use proptest::prelude::*;

fn leaves_strategy(depth: u32) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, 1usize << depth)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncation_contracts_second_moment(leaves in leaves_strategy(5), m in 0u32..=5) {
        let phi = DyadicSimpleFunction::new(1, 5, leaves).unwrap();
        let root = DyadicCube::root(1);
        let full = phi.second_moment(&root).unwrap();
        let trunc = phi.truncate(m);
        let tm = trunc.second_moment(&DyadicCube::root(1)).unwrap();
        prop_assert!(tm <= full + 1e-12);
        // means are preserved exactly up to rounding
        prop_assert!((trunc.mean() - phi.mean()).abs() < 1e-12);
    }

    #[test]
    fn inverted_k_below_norm(leaves in leaves_strategy(5)) {
        let phi = DyadicSimpleFunction::new(1, 5, leaves).unwrap();
        let norm = bmo_dyadic(&phi).value;
        for h in [OscillationGauge::power(0.5).unwrap(), OscillationGauge::log1p()] {
            let k = k_h_dyadic(&phi, &h).value;
            prop_assert!(h.inverse(k).unwrap() <= norm + 1e-9);
        }
    }

    #[test]
    fn closed_form_lower_bound_for_k(leaves in leaves_strategy(4)) {
        let phi = DyadicSimpleFunction::new(1, 4, leaves).unwrap();
        let norm = bmo_dyadic(&phi).value;
        for h in [OscillationGauge::power(0.5).unwrap(), OscillationGauge::log1p()] {
            let k = k_h_dyadic(&phi, &h).value;
            let lower = 0.125 * h.eval(2.0f64.powf(1.5) * norm);
            prop_assert!(lower <= k + 1e-9);
        }
    }

    #[test]
    fn k_invariant_under_constants(leaves in leaves_strategy(4), c in -5.0f64..5.0) {
        let phi = DyadicSimpleFunction::new(1, 4, leaves).unwrap();
        let shifted = phi.axpy(1.0, &DyadicSimpleFunction::constant(1, 4, c).unwrap()).unwrap();
        let h = OscillationGauge::log1p();
        let a = k_h_dyadic(&phi, &h).value;
        let b = k_h_dyadic(&shifted, &h).value;
        prop_assert!((a - b).abs() < 1e-10);
        prop_assert!((bmo_dyadic(&phi).value - bmo_dyadic(&shifted).value).abs() < 1e-10);
    }

    #[test]
    fn grid_norm_monotone_in_resolution(leaves in leaves_strategy(4)) {
        let phi = DyadicSimpleFunction::new(1, 4, leaves).unwrap();
        let mut prev = 0.0f64;
        for g in 2..=6 {
            let v = bmo_grid(&phi, g).unwrap().value;
            prop_assert!(v >= prev - 1e-9);
            prev = v;
        }
    }

    #[test]
    fn dyadic_norm_below_grid_norm(leaves in leaves_strategy(5)) {
        let phi = DyadicSimpleFunction::new(1, 5, leaves).unwrap();
        let d = bmo_dyadic(&phi).value;
        let g = bmo_grid(&phi, 5).unwrap().value;
        prop_assert!(d <= g + 1e-9);
    }

    #[test]
    fn segment_enlargement_lemma(
        u1 in -3.0f64..3.0, v1 in -3.0f64..3.0,
        a in 0.0f64..1.0, b in 0.0f64..1.0,
        t in 0.1f64..2.0,
    ) {
        let u = (u1, u1 * u1 + a * 4.0 * t * t);
        let v = (v1, v1 * v1 + b * 4.0 * t * t);
        let mid = ((u.0 + v.0) / 2.0, (u.1 + v.1) / 2.0);
        if omega_contains(mid.0, mid.1, t) {
            prop_assert!(segment_domain_check(u, v, t).unwrap());
        }
    }

    #[test]
    fn rising_sun_postconditions(leaves in leaves_strategy(5), lift in 0.0f64..2.0) {
        let phi = DyadicSimpleFunction::new(1, 5, leaves).unwrap();
        let lambda = phi.mean() + lift;
        let out = rising_sun(&phi, lambda).unwrap();
        for &(x, y) in &out {
            let m = phi.mean_of_on(x, y, &|v| v);
            prop_assert!((m - lambda).abs() < 1e-9);
        }
        for w in out.windows(2) {
            prop_assert!(w[0].1 <= w[1].0 + 1e-12);
        }
    }

    #[test]
    fn dsf_round_trip(leaves in leaves_strategy(4)) {
        let phi = DyadicSimpleFunction::new(1, 4, leaves).unwrap();
        let text = phi.to_dsf_string();
        let back = DyadicSimpleFunction::from_dsf_str(&text).unwrap();
        prop_assert_eq!(phi.leaves(), back.leaves());
    }

    #[test]
    fn induction_margin_nonnegative(leaves in leaves_strategy(3), k in 1u32..=3) {
        let phi = DyadicSimpleFunction::new(1, 3, leaves).unwrap();
        let t = bmo_dyadic(&phi).value.max(1e-6);
        let h = OscillationGauge::power(0.5).unwrap();
        let m = bellman_induction_check(&phi, t, &h, k).unwrap();
        prop_assert!(m >= -1e-8, "margin {}", m);
    }
}
