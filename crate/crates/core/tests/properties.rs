//! Property tests of the numerical building blocks.

use proptest::prelude::*;

use vlasov_wave::convergence::free_streaming_error;
use vlasov_wave::coupling::SolverOptions;
use vlasov_wave::division::{pair_lhs, pair_rhs, TestFunction};
use vlasov_wave::wave::{kernel, step_b_fields};
use vlasov_wave::{build_grid, bump, v_hat, Axis, DomainBounds, FieldState, InitialData, Profile2d, Simulation};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relativistic_speed_is_odd_monotone_and_subluminal(v in -1e3..1e3f64, dv in 1e-6..1.0f64) {
        prop_assert!(v_hat(v).abs() < 1.0);
        prop_assert_eq!(v_hat(-v), -v_hat(v));
        prop_assert!(v_hat(v + dv) > v_hat(v));
    }

    #[test]
    fn kernel_matches_closed_form(v in -50.0..50.0f64) {
        let v0 = 1f64.hypot(v);
        let kp = -(v0 - v).powi(2) / v0;
        prop_assert!((kernel(1.0, v) - kp).abs() <= 1e-12 * (1.0 + kp.abs()));
        prop_assert!((kernel(-1.0, v) + kernel(1.0, -v)).abs() <= 1e-15);
    }

    #[test]
    fn bump_is_nonnegative_and_compact(c in -3.0..3.0f64, r in 0.1..3.0f64, z in -10.0..10.0f64) {
        let b = bump(c, r, 1.0);
        prop_assert!(b(z) >= 0.0 && b(z) <= 1.0);
        if (z - c).abs() >= r {
            prop_assert_eq!(b(z), 0.0);
        }
    }

    #[test]
    fn free_wave_shift_is_exact(values in prop::collection::vec(-5.0..5.0f64, 33), steps in 1usize..20) {
        let n = values.len();
        let zero = vec![0.0; n];
        let rev: Vec<f64> = values.iter().rev().copied().collect();
        let mut fs = FieldState { b_plus: values.clone(), b_minus: rev.clone(), a: zero.clone(), time: 0.0 };
        for _ in 0..steps {
            fs = step_b_fields(&fs, &zero, &zero, 0.25);
        }
        for i in 0..n - steps {
            prop_assert_eq!(fs.b_plus[i], values[i + steps]);
            prop_assert_eq!(fs.b_minus[i + steps], rev[i]);
        }
    }

    #[test]
    fn division_identity_for_any_subluminal_speed(a in -0.95..0.95f64) {
        for name in ["product_bump", "offset"] {
            let phi = TestFunction::preset(name).unwrap();
            let (l, r) = (pair_lhs(a, &phi).unwrap(), pair_rhs(a, &phi).unwrap());
            prop_assert!((l - r).abs() <= 1e-8 * (1.0 + r.abs()), "{} a={}: {} vs {}", name, a, l, r);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn zero_field_transport_is_exact(xc in -1.0..1.0f64, vc in -1.0..1.0f64, r in 0.4..1.2f64) {
        let data = InitialData { f0: Profile2d::bump2d(xc, r, vc, r, 1.0), ..InitialData::zero() };
        let b = DomainBounds { x_min: -5.0, x_max: 5.0, v_min: -3.0, v_max: 3.0 };
        let g = build_grid(b, 40, 40, 1.5, data.extent().as_ref()).unwrap();
        let mut sim = Simulation::new(g, data, SolverOptions { coupling: false, ..Default::default() }).unwrap();
        sim.run().unwrap();
        let err = free_streaming_error(&g, &data, &sim.state.distribution.values, sim.time());
        prop_assert!(err <= 1e-12, "{}", err);
    }

    #[test]
    fn coupled_run_keeps_sup_norm_and_sign(h in 0.2..2.0f64, vc in -1.0..1.0f64) {
        let data = InitialData { f0: Profile2d::bump2d(0.0, 1.0, vc, 1.0, h), ..InitialData::zero() };
        let b = DomainBounds { x_min: -5.0, x_max: 5.0, v_min: -4.0, v_max: 4.0 };
        let g = build_grid(b, 48, 48, 2.0, data.extent().as_ref()).unwrap();
        let mut sim = Simulation::new(g, data, SolverOptions::default()).unwrap();
        sim.run().unwrap();
        let f = &sim.state.distribution;
        prop_assert!(f.max() <= h * (1.0 + 1e-12));
        prop_assert!(f.undershoot() >= 0.0);
    }
}

#[test]
fn axis_nodes_span_the_interval() {
    let a = Axis::new(-6.0, 6.0, 256).unwrap();
    assert_eq!(a.len(), 257);
    assert_eq!(a.node(0), -6.0);
    assert_eq!(a.node(256), 6.0);
}
