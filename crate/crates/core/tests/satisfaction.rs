use linag_core::battery::Gen;
use linag_core::casestudy::{build_contract_c2, build_follower_system, CaseStudyParams};
use linag_core::contracts::LinearContract;
use linag_core::lp::{solve, CountingSolver, LpOutcome, LpProblem};
use linag_core::mat::{row_matrix, vector};
use linag_core::satisfaction::{
    build_theta_step, check_satisfaction, check_satisfaction_with, load_init, load_system,
    save_init, save_system, AffineSystem, SatFamily,
};
use linag_core::verdict::RowStatus;
use linag_core::{Execution, Simplex};
use nalgebra::{DMatrix, DVector};

const TOL: f64 = 1e-7;

fn case(lambda_shift: f64) -> (AffineSystem, LinearContract, linag_core::satisfaction::InitSet) {
    let mut p = CaseStudyParams::default();
    p.lambda += lambda_shift;
    let (sys, init) = build_follower_system(&p).unwrap();
    (sys, build_contract_c2(&p), init)
}

#[test]
fn follower_satisfies_dynamics_contract() {
    let (sys, c2, init) = case(0.0);
    let v = check_satisfaction(&sys, &c2, &init, TOL).unwrap();
    assert!(v.holds);
    assert_eq!(v.lp_count, 2);
    assert!(v.theta_base[0].abs() <= 1e-9, "{:?}", v.theta_base);
    assert!(v.theta_step[0].abs() <= 1e-9, "{:?}", v.theta_step);
}

#[test]
fn controller_margin_shifts_step_value() {
    for (shift, expect) in [(-0.1, 0.1), (0.1, -0.1)] {
        let (sys, c2, init) = case(shift);
        let v = check_satisfaction(&sys, &c2, &init, TOL).unwrap();
        assert!((v.theta_step[0] - expect).abs() <= 1e-9, "{shift}: {:?}", v.theta_step);
        assert!(v.theta_base[0].abs() <= 1e-9);
        assert_eq!(v.holds, expect <= 0.0);
    }
}

#[test]
fn failing_step_witness_obeys_the_dynamics() {
    let (sys, c2, init) = case(-0.1);
    let v = check_satisfaction(&sys, &c2, &init, TOL).unwrap();
    let row = v.rows.iter().find(|r| r.family == SatFamily::Step).unwrap();
    let w = row.witness.as_ref().expect("witness");
    let lp = build_theta_step(&sys, &c2, 0).unwrap();
    assert!(lp.problem.is_feasible_point(w));
    assert!((lp.problem.objective().dot(w) + lp.constant - row.theta).abs() <= 1e-9);
    // Layout z₀ y₀ z₁ y₁.
    let (z0, y0, y1) = (w.rows(0, 2).into_owned(), w.rows(2, 2).into_owned(), w.rows(6, 2).into_owned());
    let residual = (y1 - sys.step(&y0, &z0)).amax();
    assert!(residual <= 1e-9, "residual {residual}");
}

#[test]
fn uncontrolled_integrator_drifts_with_offset() {
    // With F = I and B = 0 the follower ignores the measurement. The step
    // value grows by h per unit of velocity offset, and already fails at
    // zero offset because the measured position may fall back.
    let (_, c2, init) = case(0.0);
    let h = CaseStudyParams::default().h;
    let theta = |eps: f64| {
        let sys = AffineSystem::new(DMatrix::identity(2, 2), DMatrix::zeros(2, 2), vector(&[0.0, eps])).unwrap();
        check_satisfaction(&sys, &c2, &init, TOL).unwrap()
    };
    let base = theta(0.0);
    assert!(!base.holds);
    assert!(base.unbounded_rows.is_empty());
    assert!(base.theta_step[0] > 1.0);
    for eps in [0.1, 1.0, 10.0] {
        let v = theta(eps);
        assert!(!v.holds);
        assert!((v.theta_step[0] - base.theta_step[0] - h * eps).abs() <= 1e-9);
    }
    let far = -base.theta_step[0] / h - 0.01;
    assert!(theta(far).holds);
}

#[test]
fn vacuous_contract_needs_no_programs() {
    let (sys, _, init) = case(0.0);
    let counter = CountingSolver::new(Simplex::default());
    let c = LinearContract::vacuous("none", 2, 2);
    let v = check_satisfaction_with(&counter, Execution::Sequential, &sys, &c, &init, TOL).unwrap();
    assert!(v.holds);
    assert_eq!(v.lp_count, 0);
    assert_eq!(counter.calls(), 0);
    assert_eq!(v.max_base(), f64::NEG_INFINITY);
}

#[test]
fn two_programs_per_guarantee_row() {
    let (sys, mut c2, init) = case(0.0);
    c2.guar_next = DMatrix::zeros(3, 4);
    c2.guar_now = row_matrix(&[&[-1.0, 0.0, 1.0, 2.0], &[0.0, 0.0, 0.0, 1.0], &[0.0, 0.0, 0.0, -1.0]]);
    c2.guar_rhs = vector(&[-0.5, 100.0, 100.0]);
    let counter = CountingSolver::new(Simplex::default());
    let v = check_satisfaction_with(&counter, Execution::Parallel, &sys, &c2, &init, TOL).unwrap();
    assert_eq!(counter.calls(), 6);
    assert_eq!(v.theta_base.len(), 3);
    assert_eq!(v.theta_step.len(), 3);
}

#[test]
fn look_ahead_guarantees_use_three_slices() {
    // Guarantee on the next follower position only: p_f(k+1) − p_f(k) ≤ 100.
    let (sys, mut c2, init) = case(0.0);
    c2.guar_next = row_matrix(&[&[0.0, 0.0, 1.0, 0.0]]);
    c2.guar_now = row_matrix(&[&[0.0, 0.0, -1.0, 0.0]]);
    c2.guar_rhs = vector(&[100.0]);
    let lp = build_theta_step(&sys, &c2, 0).unwrap();
    assert_eq!(lp.slices, 3);
    let v = check_satisfaction(&sys, &c2, &init, TOL).unwrap();
    // v_f is free at step 0, so the position increment is unbounded.
    assert!(!v.holds);
    assert!(v.rows.iter().any(|r| r.status == RowStatus::Unbounded));
}

#[test]
fn system_and_init_files_round_trip() {
    let (sys, _, init) = case(0.0);
    let dir = tempfile::tempdir().unwrap();
    let (sp, ip) = (dir.path().join("sys.json"), dir.path().join("init.json"));
    save_system(&sys, "follower", &sp).unwrap();
    save_init(&init, 2, &ip).unwrap();
    let back = load_system(&sp).unwrap();
    assert_eq!(back, sys);
    for (a, b) in back.state_matrix.iter().zip(sys.state_matrix.iter()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    assert_eq!(load_init(&ip).unwrap(), init);
}

/// A point of `{z₁ : A¹ z₁ ≤ a − A⁰ z₀}`: a random convex combination of LP
/// optima for random objectives.
fn sample_next_input(g: &mut Gen, c: &LinearContract, z0: &DVector<f64>) -> DVector<f64> {
    // Keep v_m within [0, 40]; without a floor the admissible box empties
    // once v_m falls far enough below zero.
    let n = z0.len();
    let mut a = DMatrix::zeros(c.num_assumptions() + 2, n);
    a.rows_mut(0, c.num_assumptions()).copy_from(&c.assume_next);
    a[(c.num_assumptions(), 1)] = -1.0;
    a[(c.num_assumptions() + 1, 1)] = 1.0;
    let lim = &c.assume_rhs - &c.assume_now * z0;
    let rhs = DVector::from_iterator(a.nrows(), lim.iter().copied().chain([0.0, 40.0]));
    let mut weights = Vec::new();
    let mut points = Vec::new();
    for _ in 0..3 {
        let obj = g.vec(z0.len(), -1.0, 1.0);
        let lp = LpProblem::new(obj, a.clone(), rhs.clone()).unwrap();
        match solve(&lp).unwrap() {
            LpOutcome::Optimal { point, .. } => {
                points.push(point);
                weights.push(g.unit());
            }
            other => panic!("input set should be a nonempty box, got {other:?}"),
        }
    }
    let total: f64 = weights.iter().sum();
    points.iter().zip(&weights).fold(DVector::zeros(z0.len()), |acc, (p, w)| acc + p * (w / total))
}

#[test]
fn verified_loop_keeps_guarantee_under_admissible_inputs() {
    let p = CaseStudyParams::default();
    let (sys, init) = build_follower_system(&p).unwrap();
    let c2 = build_contract_c2(&p);
    assert!(check_satisfaction(&sys, &c2, &init, TOL).unwrap().holds);

    let mut g = Gen::new(11);
    for trial in 0..5 {
        let mut z = vector(&[60.0 + 10.0 * trial as f64, 25.0]);
        let mut y = vector(&[0.0, 20.0]);
        y[0] = z[0] - p.h * y[1] - p.delta_p - g.range(0.0, 5.0);
        assert!(init.contains(&z, &y, 1e-12));
        for k in 0..1000 {
            let lhs = (&c2.guar_now * DVector::from_iterator(4, z.iter().chain(y.iter()).copied()))[0];
            assert!(lhs <= c2.guar_rhs[0] + 1e-6, "trial {trial} step {k}: {lhs}");
            let z_next = sample_next_input(&mut g, &c2, &z);
            y = sys.step(&y, &z);
            z = z_next;
        }
    }
}
