use std::f64::consts::PI;

use proptest::prelude::*;
use sectorheat::conformal::{
    conformal_factor, corner_contribution, curvatures_from_model, heat_trace_coefficients, model_from_corner,
    r0_from_curvatures, CornerData, DomainDescription, ModelParams,
};

fn angle() -> impl Strategy<Value = f64> {
    prop_oneof![0.1f64..PI - 0.05, PI + 0.05..2.0 * PI - 0.1]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn curvature_round_trip(alpha in angle(), kp in -5.0f64..5.0, km in -5.0f64..5.0) {
        let m = model_from_corner(CornerData::new(alpha, kp, km).unwrap()).unwrap();
        let (a, b) = curvatures_from_model(m, alpha);
        prop_assert!((a - kp).abs() <= 1e-12 * (1.0 + kp.abs()));
        prop_assert!((b - km).abs() <= 1e-12 * (1.0 + km.abs()) / alpha.sin().abs());
    }

    #[test]
    fn r0_symmetric_and_consistent(alpha in angle(), kp in -5.0f64..5.0, km in -5.0f64..5.0) {
        let r = r0_from_curvatures(alpha, kp, km).unwrap();
        prop_assert_eq!(r, r0_from_curvatures(alpha, km, kp).unwrap());
        let m = model_from_corner(CornerData::new(alpha, kp, km).unwrap()).unwrap();
        prop_assert!((m.r0 - r).abs() <= 1e-12 * (1.0 + r));
    }

    #[test]
    fn factor_positive_near_corner(u0 in -3.0f64..3.0, v0 in -3.0f64..3.0, s in 0.0f64..0.999, th in -PI..PI) {
        let m = ModelParams::from_z0(u0, v0);
        prop_assume!(m.r0 > 0.0);
        let r = s / (2.0 * m.r0);
        prop_assert!(conformal_factor(r, th, m) > 0.0);
        let y = [r * th.cos(), r * th.sin()];
        let f = m.factor_at(y);
        prop_assert!((f - conformal_factor(r, th, m)).abs() <= 1e-12 * (1.0 + f));
    }

    #[test]
    fn contribution_is_linear_in_curvatures(alpha in angle(), kp in -3.0f64..3.0, km in -3.0f64..3.0, lam in -4.0f64..4.0, c in 0.0f64..1.0) {
        let base = corner_contribution(CornerData::new(alpha, kp, km).unwrap(), c).unwrap();
        let scaled = corner_contribution(CornerData::new(alpha, lam * kp, lam * km).unwrap(), c).unwrap();
        prop_assert!((scaled - lam * base).abs() <= 1e-12 * (1.0 + base.abs() * lam.abs()));
    }

    #[test]
    fn assembly_is_linear(k2 in 0.0f64..20.0, c in 0.0f64..0.1) {
        let mut d = DomainDescription::unit_half_disk();
        d.kappa_sq_integral = k2;
        let a = heat_trace_coefficients(&d, &[(PI / 2.0, c)]).unwrap();
        d.kappa_sq_integral = 2.0 * k2;
        let b = heat_trace_coefficients(&d, &[(PI / 2.0, c)]).unwrap();
        prop_assert_eq!(&a[..3], &b[..3]);
        let corner = 2.0 * corner_contribution(d.corners[0], c).unwrap();
        let first = a[3] - corner;
        prop_assert!((b[3] - corner - 2.0 * first).abs() <= 1e-14);
    }
}

#[test]
fn incomplete_table_is_reported() {
    let d = DomainDescription::unit_half_disk();
    assert!(heat_trace_coefficients(&d, &[]).is_err());
    assert!(heat_trace_coefficients(&DomainDescription::rectangle(1.0, 2.0), &[]).is_ok());
}
