use isoperiodic::apps::{
    config_to_weierstrass, lame_two_gap_config, weierstrass_to_config, Lattice, WeierstrassData,
};
use isoperiodic::comb::comb_for_config;
use isoperiodic::periodics::{curve_periods, normalized_basis, CanonicalBasis};
use isoperiodic::{BranchConfig64, Complex64};
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// 0 < u < x with both gaps bounded away from zero.
fn genus1() -> impl Strategy<Value = (f64, f64)> {
    (0.2f64..3.0, 0.2f64..3.0).prop_map(|(a, b)| (a + b, a))
}

/// 0 < u₁ < x₁ < u₂ < x₂ from four positive gaps.
fn genus2() -> impl Strategy<Value = ([f64; 2], [f64; 2])> {
    prop::array::uniform4(0.3f64..2.0).prop_map(|d| {
        let u1 = d[0];
        let x1 = u1 + d[1];
        let u2 = x1 + d[2];
        let x2 = u2 + d[3];
        ([x1, x2], [u1, u2])
    })
}

/// e₁ = −e₂−e₃ < e₂ < e₃ with separated roots.
fn roots() -> impl Strategy<Value = (f64, f64)> {
    (0.3f64..2.0, 0.1f64..0.9).prop_map(|(e3, t)| (-0.5 * e3 + 1.5 * e3 * t, e3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn weierstrass_config_round_trip((e2, e3) in roots()) {
        let cfg = weierstrass_to_config(e2, e3).unwrap();
        let (f2, f3) = config_to_weierstrass(cfg.x[0].re, cfg.u[0].re);
        prop_assert!((f2 - e2).abs() < 1e-14 && (f3 - e3).abs() < 1e-14);
    }

    #[test]
    fn lame_roots_recovered_from_x((e2, e3) in roots()) {
        let l = lame_two_gap_config(e2, e3).unwrap();
        prop_assert!((l.e_roundtrip[0] - e2).abs() < 1e-13);
        prop_assert!((l.e_roundtrip[1] - e3).abs() < 1e-13);
    }

    #[test]
    fn riemann_matrix_symmetric_with_positive_imaginary_part((x, u) in genus2()) {
        let curve = BranchConfig64::from_real(&x, &u).curve();
        let basis = CanonicalBasis::default_for(&curve, 1e-12).unwrap();
        let b = normalized_basis(&curve, &basis, 1e-12).unwrap().riemann;
        prop_assert!((b[0][1] - b[1][0]).norm() < 1e-9);
        let det = b[0][0].im * b[1][1].im - b[0][1].im * b[1][0].im;
        prop_assert!(b[0][0].im > 0.0 && det > 0.0);
        prop_assert!(b.iter().flatten().all(|z| z.re.abs() < 1e-7));
    }

    #[test]
    fn translation_leaves_riemann_matrix_unchanged((x, u) in genus1(), s in -1.0f64..1.0) {
        let curve = BranchConfig64::from_real(&[x], &[u]).curve();
        let basis = CanonicalBasis::default_for(&curve, 1e-12).unwrap();
        let b0 = normalized_basis(&curve, &basis, 1e-12).unwrap().riemann[0][0];
        let b1 = normalized_basis(&curve.shifted(c(s)), &basis, 1e-12).unwrap().riemann[0][0];
        prop_assert!((b0 - b1).norm() < 1e-10 * b0.norm());
    }

    #[test]
    fn omega_b_periods_are_real_for_real_curves((x, u) in genus2()) {
        let curve = BranchConfig64::from_real(&x, &u).curve();
        let basis = CanonicalBasis::default_for(&curve, 1e-12).unwrap();
        let cp = curve_periods(&curve, &basis, &[c(0.0), c(0.0)], 1e-12).unwrap();
        prop_assert!(cp.omega.beta.iter().all(|b| b.im.abs() < 1e-9 * b.norm()));
    }

    #[test]
    fn comb_height_ratio_is_minus_one_half((x, u) in genus1()) {
        let cfg = BranchConfig64::from_real(&[x], &[u]);
        let basis = CanonicalBasis::default_for(&cfg.curve(), 1e-12).unwrap();
        let r = comb_for_config(&cfg, &basis, 1e-12).unwrap();
        prop_assert!((r.ratio[0][0] + 0.5).abs() < 1e-8 && r.ratio[0][1].abs() < 1e-8);
        prop_assert!(r.q[0] > 0.0 && r.h[0] > 0.0);
        prop_assert!(u < r.xi[0] && r.xi[0] < x);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn wp_is_even_periodic_and_solves_its_ode((e2, e3) in roots(), t in 0.1f64..0.9, s in 0.1f64..0.9) {
        let wd = WeierstrassData::new(e2, e3, 1e-12).unwrap();
        let lat = Lattice::new(&wd, None);
        let z = wd.w1 * t + wd.w2 * s;
        let p = lat.wp(z).unwrap();
        let scale = p.value.norm().max(1.0);
        prop_assert!((lat.wp(-z).unwrap().value - p.value).norm() < 1e-8 * scale);
        prop_assert!((lat.wp(z + wd.w1 * 2.0).unwrap().value - p.value).norm() < 1e-6 * scale);
        prop_assert!(p.ode_residual < 1e-6);
    }
}
