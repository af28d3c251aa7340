use killingflow::barriers::{curvature_bound, interior_gradient_bound_tail, make_sc_barrier, HalfplaneGeodesic};
use killingflow::{make_model, ModelGeometry, ProfileSpec};
use proptest::prelude::*;

fn hyperbolic(rho: ProfileSpec) -> ModelGeometry {
    make_model(ProfileSpec::hyperbolic(1.0), ProfileSpec::hyperbolic(1.0), rho, 2, 1e-10).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn curvature_bound_is_monotone(
        delta in 0.01f64..1.0,
        l1 in 0.0f64..5.0,
        c in 0.0f64..3.0,
        e in 0.0f64..10.0,
        zeta in 0.1f64..5.0,
        t in 0.01f64..5.0,
        bump in 0.0f64..1.0,
    ) {
        let base = curvature_bound(delta, l1, c, c, e, zeta, t).unwrap();
        prop_assert!(base > 0.0);
        // Increasing in L1, C, E_R; decreasing in delta, zeta_R, T.
        prop_assert!(curvature_bound(delta, l1 + bump, c, c, e, zeta, t).unwrap() >= base);
        prop_assert!(curvature_bound(delta, l1, c + bump, c, e, zeta, t).unwrap() >= base);
        prop_assert!(curvature_bound(delta, l1, c, c, e + bump, zeta, t).unwrap() >= base);
        prop_assert!(curvature_bound(delta + bump, l1, c, c, e, zeta, t).unwrap() <= base);
        prop_assert!(curvature_bound(delta, l1, c, c, e, zeta + bump, t).unwrap() <= base);
        prop_assert!(curvature_bound(delta, l1, c, c, e, zeta, t + bump).unwrap() <= base);
    }

    #[test]
    fn gradient_bound_grows_with_oscillation(m in 0.01f64..5.0, bump in 0.0f64..2.0, radius in 0.5f64..3.0) {
        let model = make_model(ProfileSpec::Euclidean, ProfileSpec::Euclidean, ProfileSpec::constant(1.0), 2, 1e-10).unwrap();
        let k: f64 = 17.0;
        let tail = 0.5 / (1.0 + k.exp());
        let a = interior_gradient_bound_tail(&model, radius, m, tail, k).unwrap();
        let b = interior_gradient_bound_tail(&model, radius, m + bump, tail, k).unwrap();
        prop_assert!(b.log_bound >= a.log_bound);
        prop_assert!(a.mu > 0.0);
    }

    #[test]
    fn sc_barrier_is_continuous(theta in -3.0f64..3.0, delta in 0.2f64..2.0, c in 0.1f64..5.0, d0 in 2.0f64..4.0) {
        let model = hyperbolic(ProfileSpec::cosh(1.0));
        let b = make_sc_barrier(&model, HalfplaneGeodesic { delta, theta }, c, d0).unwrap();
        let gap = (b.eta_of_distance(d0) - b.eta_of_distance(d0 - 1e-12)).abs();
        prop_assert!(gap <= 1e-9 * c, "jump {} at d0", gap);
        // Nonincreasing in the distance and bounded by C.
        let mut prev = f64::INFINITY;
        for i in 0..64 {
            let eta = b.eta_of_distance(d0 - 1.0 + 0.1 * i as f64);
            prop_assert!(eta <= prev * (1.0 + 1e-12) && eta <= c * (1.0 + 1e-12));
            prev = eta;
        }
    }
}
