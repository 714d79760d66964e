use std::f64::consts::TAU;

use proptest::prelude::*;

use milnorflow::geom_core::{from_quat_pair, hopf_field_01, quat, to_quat_pair, Quat, R8};
use milnorflow::jet::Jet;
use milnorflow::milnor_bundle::{
    clutching_map, commutation_residual, hopf_family_field, s7_point, transition, transition_inverse, BundleSpec,
    ChartPoint, FibrationField,
};
use milnorflow::multicentre::{linearization, MulticentreField};

fn unit_quat() -> impl Strategy<Value = Quat> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("away from zero", |c| c.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(|[a, b, c, d]| quat(a, b, c, d).normalize())
}

fn spec() -> impl Strategy<Value = BundleSpec> {
    prop_oneof![Just(BundleSpec::E01), Just(BundleSpec::E10)]
}

fn s7() -> impl Strategy<Value = R8> {
    prop::array::uniform8(-1.0f64..1.0)
        .prop_filter("away from zero", |c| c.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(|c| R8::from_column_slice(&c).normalize())
}

proptest! {
    #[test]
    fn transition_round_trips(s in spec(), v in unit_quat(), w in unit_quat(), log_r in -2.0f64..2.0) {
        let v = v * log_r.exp();
        let (u, eta) = transition(s, &v, &w).unwrap();
        prop_assert!((u.norm() * v.norm() - 1.0).abs() < 1e-14);
        prop_assert!((eta.norm() - 1.0).abs() < 1e-14);
        let (v2, w2) = transition_inverse(s, &u, &eta).unwrap();
        prop_assert!((v2 - v).norm() <= 1e-13 * v.norm());
        prop_assert!((w2 - w).norm() <= 1e-13);
    }

    #[test]
    fn natural_action_commutes(s in spec(), v in unit_quat(), w in unit_quat(), t in 0.0f64..TAU, r in 0.1f64..10.0) {
        prop_assert!(commutation_residual(s, &(v * r), &w, t).unwrap() <= 1e-13);
    }

    #[test]
    fn clutching_lands_on_unit_sphere(h in -50i64..50, v in unit_quat(), w in unit_quat()) {
        let c = clutching_map(BundleSpec::new(h, 1 - h).unwrap(), &v, &w).unwrap();
        prop_assert!((c.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn charts_round_trip_through_s7(s in spec(), z in s7()) {
        let p = ChartPoint::from_s7(s, &z).unwrap();
        let back = p.to_s7(s).unwrap();
        prop_assert!((back - z).amax() < 1e-14);
        let (q1, q2) = to_quat_pair(&z);
        prop_assert!((p.u5() - (q1.norm_squared() - q2.norm_squared())).abs() < 1e-14);
        let other = p.switch(s).unwrap().to_s7(s).unwrap();
        prop_assert!((other - z).amax() < 1e-13);
    }

    #[test]
    fn quaternion_pairs_round_trip(z in s7()) {
        let (a, b) = to_quat_pair(&z);
        prop_assert_eq!(from_quat_pair(&a, &b), z);
    }

    #[test]
    fn hopf_field_is_a_unit_rotation(z in s7()) {
        let h = hopf_field_01(&z);
        prop_assert!(h.dot(&z).abs() < 1e-15);
        prop_assert!((h.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn jets_match_closed_form_derivatives(x in -3.0f64..3.0) {
        let f = Jet::var(x).sin().exp();
        let (s, c) = x.sin_cos();
        let e = s.exp();
        prop_assert!((f.value() - e).abs() < 1e-14 * e);
        prop_assert!((f.d(1) - c * e).abs() < 1e-13 * e);
        prop_assert!((f.d(2) - (c * c - s) * e).abs() < 1e-13 * e.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fibration_field_is_tangent_to_s7(u5 in -0.9f64..0.9, th in unit_quat(), w in unit_quat()) {
        let z = s7_point(BundleSpec::E01, u5, &th, &w).unwrap();
        let f = FibrationField::new(BundleSpec::E01).unwrap();
        let v = f.eval_s7(&z).unwrap();
        prop_assert!(v.dot(&z).abs() < 1e-12 * v.norm().max(1.0));
        let frozen = f.at_level(&z).unwrap().eval_s7(&z).unwrap();
        prop_assert!((frozen - v).amax() < 1e-12);
    }

    #[test]
    fn hopf_family_is_tangent(mu in 0.0f64..1.0, u5 in -0.9f64..0.9, th in unit_quat(), w in unit_quat()) {
        let z = s7_point(BundleSpec::E01, u5, &th, &w).unwrap();
        let v = hopf_family_field(mu, &z).unwrap();
        prop_assert!(v.dot(&z).abs() < 1e-12 * v.norm().max(1.0));
    }

    #[test]
    fn multicentre_preserves_spheres(z in s7(), r in 0.02f64..0.98) {
        let x = z * r;
        let v = MulticentreField::new().eval(&x).unwrap();
        prop_assert!(v.dot(&x).abs() <= 1e-10 * r * r);
        let rem = v - linearization() * x;
        prop_assert!(rem.dot(&x).abs() <= 1e-10 * r * r);
    }
}
