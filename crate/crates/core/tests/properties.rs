use pinchlab::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pythagorean_identity(d in -2.0f64..2.0, t in 0.001f64..0.999) {
        let delta = CurvatureParam::new(d).unwrap();
        let r = t * delta.max_radius().min(3.0);
        let s = s_delta(delta, r).unwrap();
        let c = c_delta(delta, r).unwrap();
        prop_assert!((c * c + d * s * s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exp_log_round_trip(d in prop::sample::select(vec![-1.0, 0.0, 1.0]), a in -0.5f64..0.5, b in -0.5f64..0.5, c in -0.5f64..0.5) {
        let m = AmbientModel::new(d, 3).unwrap();
        let p = m.origin();
        let basis = m.tangent_basis(&p);
        let v = basis[0] * a + basis[1] * b + basis[2] * c;
        let q = m.exp(&p, &v);
        prop_assert!(m.constraint_violation(&q) < 1e-12);
        prop_assert!((m.log(&p, &q) - v).norm() < 1e-10);
        prop_assert!((m.distance(&p, &q) - m.norm(&v)).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn report_invariants_on_random_perturbations(seed in 0u64..1000, amp in 0.01f64..0.15) {
        let e = AmbientModel::euclidean();
        let m = generate_icosphere(&e, &e.origin(), 1.0, 3).unwrap();
        let m = perturb_radially(&m, amp, Wave::Random(seed)).unwrap();
        let r = assemble_report(&m, &PinchOptions::default()).unwrap();
        prop_assert!(r.h > 0.0);
        let back = s_delta_inverse(CurvatureParam::new(0.0).unwrap(), 1.0 / r.h).unwrap();
        prop_assert!((r.r0 - back).abs() < 1e-10);
        prop_assert!(r.eps_spec >= -0.02);
        let v = serde_json::to_value(&r).unwrap();
        for (k, x) in v.as_object().unwrap() {
            if let Some(f) = x.as_f64() {
                prop_assert!(f.is_finite(), "{} = {}", k, f);
            }
        }
    }
}
