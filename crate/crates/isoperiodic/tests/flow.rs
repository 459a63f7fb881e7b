use isoperiodic::apps::{
    hill_along, hill_period_smallest, lame_two_gap_along, neumann_lame_example, weierstrass_flow,
    WeierstrassData,
};
use isoperiodic::isoflow::{
    integrate_flow, DeformationState, FlowMode, FlowOptions, RationalSystem, Trajectory,
};
use isoperiodic::periodics::{normalized_basis, CanonicalBasis};
use isoperiodic::{BranchConfig64, Complex64};
use num_complex::Complex;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn reference_state() -> DeformationState<f64> {
    DeformationState::new(
        BranchConfig64::from_real(&[2.0], &[1.0]),
        vec![c(0.0)],
        FlowMode::PeriodImplicit,
        1e-12,
    )
    .unwrap()
}

// Roots of (4/√x)K(√((x−u)/x)) = (4/√2)K(1/√2), solved to 30 digits by an independent
// multiprecision library and frozen here.
const U_AT_2_1: f64 = 0.942_933_922_790_903_7;
const U_AT_2_2: f64 = 0.890_240_962_458_674_6;
// Same for the real period (4/√x)K(√(u/x)).
const U_REAL_AT_2_1: f64 = 1.157_066_077_209_096_3;

#[test]
fn implicit_flow_matches_elliptic_oracle() {
    let tr = integrate_flow(
        &reference_state(),
        &[vec![c(2.1)], vec![c(2.2)]],
        &FlowOptions::default(),
    )
    .unwrap();
    let v: Vec<_> = tr.vertices().collect();
    assert_eq!(v.len(), 3);
    assert!((v[1].u[0] - c(U_AT_2_1)).norm() < 1e-10);
    assert!((v[2].u[0] - c(U_AT_2_2)).norm() < 1e-10);
    assert!(tr.max_drift() < 1e-10);
}

#[test]
fn rational_flow_matches_elliptic_oracle() {
    let tr = integrate_flow(
        &reference_state(),
        &[vec![c(2.2)]],
        &FlowOptions::rational(),
    )
    .unwrap();
    assert!((tr.last().u[0] - c(U_AT_2_2)).norm() < 1e-8);
    assert!(tr.max_drift() < 1e-5);
}

#[test]
fn real_period_flow_matches_elliptic_oracle() {
    let tr = weierstrass_flow(0.0, 1.0, 2.1, &FlowOptions::default()).unwrap();
    assert!((tr.last().u[0] - c(U_REAL_AT_2_1)).norm() < 1e-10);
}

#[test]
fn zero_length_leg_leaves_u_fixed() {
    let st = reference_state();
    let tr = integrate_flow(&st, &[vec![c(2.0)]], &FlowOptions::default()).unwrap();
    assert!((tr.last().u[0] - c(1.0)).norm() < 1e-14);
    assert!(tr.max_drift() < 1e-14);
}

#[test]
fn vertices_agree_across_modes_at_genus_two() {
    let st = DeformationState::new(
        BranchConfig64::from_real(&[3.0, 5.0], &[1.0, 4.0]),
        vec![c(0.0); 2],
        FlowMode::PeriodImplicit,
        1e-12,
    )
    .unwrap();
    let path = [vec![c(3.1), c(5.0)], vec![c(3.1), c(5.1)]];
    let imp = integrate_flow(&st, &path, &FlowOptions::default()).unwrap();
    for system in [RationalSystem::General, RationalSystem::Genus2Closed] {
        let rat = integrate_flow(
            &st,
            &path,
            &FlowOptions {
                system,
                ..FlowOptions::rational()
            },
        )
        .unwrap();
        for (a, b) in imp.vertices().zip(rat.vertices()) {
            for (p, q) in a.u.iter().zip(&b.u) {
                assert!((p - q).norm() < 1e-6, "{system:?}: {p} vs {q}");
            }
        }
    }
    // Interlacing 0 < u₁ < x₁ < u₂ < x₂ survives.
    for s in &imp.samples {
        assert!(
            0.0 < s.u[0].re
                && s.u[0].re < s.x[0].re
                && s.x[0].re < s.u[1].re
                && s.u[1].re < s.x[1].re
        );
    }
}

#[test]
fn flow_with_nonzero_alpha_preserves_beta() {
    let st = DeformationState::new(
        BranchConfig64::from_real(&[2.0], &[1.0]),
        vec![c(0.3)],
        FlowMode::PeriodImplicit,
        1e-12,
    )
    .unwrap();
    let tr = integrate_flow(&st, &[vec![c(2.1)]], &FlowOptions::default()).unwrap();
    assert!(tr.max_drift() < 1e-9);
    // The target β = 2πiU + α𝔹 differs, so u moves differently.
    let plain =
        integrate_flow(&reference_state(), &[vec![c(2.1)]], &FlowOptions::default()).unwrap();
    assert!((tr.last().u[0] - plain.last().u[0]).norm() > 1e-6);
}

#[test]
fn two_gap_lame_curves_follow_the_real_period_flow() {
    let tr = weierstrass_flow(0.0, 1.0, 2.1, &FlowOptions::default()).unwrap();
    let rep = lame_two_gap_along(&tr, 1e-12).unwrap();
    assert!(rep.max_beta_drift < 1e-9, "{rep:?}");
    assert!(rep.max_im_u < 1e-12);
}

#[test]
fn half_periods_follow_the_real_period_flow() {
    let tr = weierstrass_flow(0.0, 1.0, 2.1, &FlowOptions::default()).unwrap();
    let w0 = WeierstrassData::new(0.0, 1.0, 1e-12).unwrap();
    let s = tr.last();
    let w = WeierstrassData::from_config(s.x[0].re, s.u[0].re, 1e-12).unwrap();
    assert!((w.w1 - w0.w1).norm() < 1e-10 * w0.w1.norm());
    // Only the real period is conserved.
    assert!((w.w2 - w0.w2).norm() > 1e-4);
}

#[test]
fn neumann_example_stays_hill() {
    let (cfg, path) = neumann_lame_example::<f64>().unwrap();
    let st = DeformationState::new(cfg, vec![c(0.0); 2], FlowMode::PeriodImplicit, 1e-12).unwrap();
    let tr = integrate_flow(&st, &path, &FlowOptions::default()).unwrap();
    let hill = hill_along(&tr, &st.basis, hill_period_smallest(&st.beta_target), 1e-9).unwrap();
    assert_eq!(hill[0].n, vec![2, 1]);
    assert!(hill
        .iter()
        .all(|h| h.is_hill && h.n == hill[0].n && h.real_branch_points));
    assert!(tr.max_im_u() < 1e-12);
}

#[test]
fn trajectory_round_trips_through_json_and_csv() {
    let tr = integrate_flow(&reference_state(), &[vec![c(2.1)]], &FlowOptions::default()).unwrap();
    let back: Trajectory<f64> = serde_json::from_str(&serde_json::to_string(&tr).unwrap()).unwrap();
    assert_eq!(back.samples.len(), tr.samples.len());
    assert_eq!(back.last().u, tr.last().u);
    let mut buf = Vec::new();
    tr.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), tr.samples.len() + 1);
}

#[test]
fn single_precision_periods_and_flow() {
    let cfg = isoperiodic::hypercurve::BranchConfig::<f32>::from_real(&[2.0], &[1.0]);
    let curve = cfg.curve();
    let basis = CanonicalBasis::default_for(&curve, 1e-5).unwrap();
    let pd = normalized_basis(&curve, &basis, 1e-5).unwrap();
    let k = pd.a_raw[0][0];
    assert!((k - Complex::new(0.0f32, 5.244_115)).norm() < 1e-4);
    let st = DeformationState::new(
        cfg,
        vec![Complex::new(0.0f32, 0.0)],
        FlowMode::PeriodImplicit,
        1e-5,
    )
    .unwrap();
    let opts = FlowOptions {
        rtol: 1e-4,
        atol: 1e-5,
        quad_tol: 1e-5,
        newton_tol: 1e-4,
        ..FlowOptions::default()
    };
    let tr = integrate_flow(&st, &[vec![Complex::new(2.1f32, 0.0)]], &opts).unwrap();
    assert!((tr.last().u[0].re - U_AT_2_1 as f32).abs() < 1e-4);
}
