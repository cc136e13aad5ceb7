use linag_core::battery::{oracle_batch, random_triple, small_dims, Gen};
use linag_core::casestudy::{build_triple, CaseStudyParams};
use linag_core::contracts::CascadeTriple;
use linag_core::lp::{enumerate_v_rep, solve, CountingSolver, LpOutcome, LpProblem};
use linag_core::mat::{row_matrix, vector};
use linag_core::refinement::{
    check_extendability, check_refinement, check_refinement_with, family_size, oracle_row_values,
    row_problem, stacked_triples, ExtendMethod, Family, HorizonConfig, DEFAULT_TOLERANCE,
};
use linag_core::verdict::RowStatus;
use linag_core::{Execution, Simplex};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

const TOL: f64 = DEFAULT_TOLERANCE;

fn h22() -> HorizonConfig {
    HorizonConfig::new(2, 2).unwrap()
}

#[test]
fn case_study_refines_with_zero_margins() {
    let t = build_triple(&CaseStudyParams::default());
    let v = check_refinement(&t, h22(), TOL).unwrap();
    assert!(v.holds);
    for f in [Family::D, Family::Otimes, Family::Omega] {
        assert!(v.rho(f).abs() <= 1e-6, "{f}: {}", v.rho(f));
    }
    assert_eq!(v.lp_count, 5 + 4 + 1);
    // Frozen per-row values.
    let expect_otimes = [-0.024, -0.234, 0.0, 0.0];
    assert_eq!(v.theta_d.len(), 5);
    assert!(v.theta_d.iter().all(|x| x.abs() <= 1e-9), "{:?}", v.theta_d);
    for (got, want) in v.theta_otimes.iter().zip(expect_otimes) {
        assert!((got - want).abs() <= 1e-9, "{:?}", v.theta_otimes);
    }
    assert!(v.theta_omega[0].abs() <= 1e-9);
    assert!(v.unbounded_rows.is_empty());
}

#[test]
fn case_study_single_step_horizon_is_unbounded() {
    let t = build_triple(&CaseStudyParams::default());
    assert_eq!(HorizonConfig::suggest(&t), HorizonConfig::default());
    let v = check_refinement(&t, HorizonConfig::default(), TOL).unwrap();
    assert!(!v.holds);
    assert!(v.family_holds(Family::D));
    assert_eq!(v.rho_otimes, f64::INFINITY);
    assert_eq!(v.rho_omega, f64::INFINITY);
    for (f, row) in &v.unbounded_rows {
        let lp = row_problem(&t, HorizonConfig::default(), *f, *row).unwrap();
        let r = v.rows.iter().find(|r| r.family == *f && r.row == *row).unwrap();
        assert!(lp.problem.is_improving_ray(r.ray.as_ref().unwrap()));
    }
}

#[test]
fn larger_velocity_noise_breaks_measurement_assumption() {
    let mut p = CaseStudyParams::default();
    p.delta_v += 0.05;
    let v = check_refinement(&build_triple(&p), h22(), TOL).unwrap();
    assert!(!v.holds);
    assert!((v.theta_otimes[2] - 0.10).abs() <= 1e-9, "{:?}", v.theta_otimes);
    assert!((v.theta_otimes[3] - 0.10).abs() <= 1e-9, "{:?}", v.theta_otimes);
    assert!(v.family_holds(Family::D) && v.family_holds(Family::Omega));
}

fn with_j0(j0: f64) -> CascadeTriple {
    let mut t = build_triple(&CaseStudyParams::default());
    t.composite.guar_rhs = vector(&[j0]);
    t
}

#[test]
fn composite_margin_shifts_omega_exactly() {
    let v = check_refinement(&with_j0(1.0), h22(), TOL).unwrap();
    assert!(v.holds);
    assert!((v.rho_omega + 1.0).abs() <= 1e-9);

    let v = check_refinement(&with_j0(-0.01), h22(), TOL).unwrap();
    assert!(!v.holds);
    assert!((v.rho_omega - 0.01).abs() <= 1e-9);
    let row = v.rows.iter().find(|r| r.family == Family::Omega).unwrap();
    let w = row.witness.as_ref().expect("witness for a failing row");
    let lp = row_problem(&with_j0(-0.01), h22(), Family::Omega, 0).unwrap();
    assert!(lp.problem.is_feasible_point(w));
    assert!((lp.evaluate(w) - 0.01).abs() <= 1e-9);
}

#[test]
fn binding_row_by_vertex_enumeration() {
    // The Ω row only involves (p_l, p_m, p_f, v_f) at the last step, tied by
    // the upstream position guarantee and the downstream guarantee. A box
    // far from the optimum keeps the polyhedron pointed.
    let p = CaseStudyParams::default();
    let (dp, h) = (p.delta_p, p.h);
    let mut rows: Vec<Vec<f64>> = vec![vec![-1.0, 1.0, 0.0, 0.0], vec![0.0, -1.0, 1.0, h]];
    let mut rhs = vec![dp, -dp];
    for i in 0..4 {
        for s in [1.0, -1.0] {
            let mut r = vec![0.0; 4];
            r[i] = s;
            rows.push(r);
            rhs.push(100.0);
        }
    }
    let a = DMatrix::from_fn(rows.len(), 4, |i, j| rows[i][j]);
    let vrep = enumerate_v_rep(&a, &DVector::from_vec(rhs)).unwrap();
    let sup = vrep.support(&vector(&[-1.0, 0.0, 1.0, h]));
    for eps in [1e-3, 1e-2] {
        let oracle = sup - (-eps);
        let v = check_refinement(&with_j0(-eps), h22(), TOL).unwrap();
        assert!(!v.holds);
        assert!((v.rho_omega - eps).abs() <= 1e-6);
        assert!((oracle - eps).abs() <= 1e-9);
        let v = check_refinement(&with_j0(eps), h22(), TOL).unwrap();
        assert!(v.holds);
        assert!((sup - eps + eps).abs() <= 1e-9 && (v.rho_omega + eps).abs() <= 1e-6);
    }
}

// --- independent premise construction for the oracle -----------------------

/// Copies `src` into `dst` at `(row, col)`.
fn put(dst: &mut DMatrix<f64>, row: usize, col: usize, src: &DMatrix<f64>) {
    for i in 0..src.nrows() {
        for j in 0..src.ncols() {
            dst[(row + i, col + j)] += src[(i, j)];
        }
    }
}

/// Columns `[from, from+len)` of `m`.
fn cols(m: &DMatrix<f64>, from: usize, len: usize) -> DMatrix<f64> {
    m.columns(from, len).into_owned()
}

/// Premise and conclusion over `[d₀ d₁ z₀ z₁ y₀ y₁]` for a one-step horizon.
fn independent_system(
    t: &CascadeTriple,
    f: Family,
) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>, DVector<f64>) {
    let (nd, nz, ny) = (t.input_dim(), t.intermediate_dim(), t.output_dim());
    let (d0, d1, z0, z1) = (0, nd, 2 * nd, 2 * nd + nz);
    let (y0, y1) = (2 * nd + 2 * nz, 2 * nd + 2 * nz + ny);
    let n = match f {
        Family::D => 2 * nd,
        Family::Otimes => 2 * (nd + nz),
        Family::Omega => 2 * (nd + nz + ny),
    };
    let (c, up, down) = (&t.composite, &t.upstream, &t.downstream);
    let mut blocks: Vec<(Vec<(usize, DMatrix<f64>)>, DVector<f64>)> =
        vec![(vec![(d1, c.assume_next.clone()), (d0, c.assume_now.clone())], c.assume_rhs.clone())];
    if f != Family::D {
        blocks.push((
            vec![
                (d1, cols(&up.guar_next, 0, nd)),
                (z1, cols(&up.guar_next, nd, nz)),
                (d0, cols(&up.guar_now, 0, nd)),
                (z0, cols(&up.guar_now, nd, nz)),
            ],
            up.guar_rhs.clone(),
        ));
    }
    if f == Family::Omega {
        blocks.push((
            vec![
                (z1, cols(&down.guar_next, 0, nz)),
                (y1, cols(&down.guar_next, nz, ny)),
                (z0, cols(&down.guar_now, 0, nz)),
                (y0, cols(&down.guar_now, nz, ny)),
            ],
            down.guar_rhs.clone(),
        ));
    }
    let assemble = |blocks: &[(Vec<(usize, DMatrix<f64>)>, DVector<f64>)]| {
        let m: usize = blocks.iter().map(|b| b.1.len()).sum();
        let mut a = DMatrix::zeros(m, n);
        let mut b = DVector::zeros(m);
        let mut r = 0;
        for (parts, rhs) in blocks {
            for (col, mat) in parts {
                put(&mut a, r, *col, mat);
            }
            b.rows_mut(r, rhs.len()).copy_from(rhs);
            r += rhs.len();
        }
        (a, b)
    };
    let (a, b) = assemble(&blocks);
    let concl = match f {
        Family::D => vec![(
            vec![(d1, up.assume_next.clone()), (d0, up.assume_now.clone())],
            up.assume_rhs.clone(),
        )],
        Family::Otimes => vec![(
            vec![(z1, down.assume_next.clone()), (z0, down.assume_now.clone())],
            down.assume_rhs.clone(),
        )],
        Family::Omega => vec![(
            vec![
                (d1, cols(&c.guar_next, 0, nd)),
                (y1, cols(&c.guar_next, nd, ny)),
                (d0, cols(&c.guar_now, 0, nd)),
                (y0, cols(&c.guar_now, nd, ny)),
            ],
            c.guar_rhs.clone(),
        )],
    };
    let (k, kr) = assemble(&concl);
    (a, b, k, kr)
}

#[test]
fn per_row_verdicts_match_vertex_enumeration_oracle() {
    let batch = oracle_batch(2024, 200, 100);
    let (mut rows_checked, mut bounded_instances) = (0, 0);
    for (i, t) in batch.iter().enumerate() {
        let v = check_refinement(t, HorizonConfig::default(), TOL).unwrap();
        let mut all_bounded = true;
        for f in [Family::D, Family::Otimes, Family::Omega] {
            let (a, b, k, kr) = independent_system(t, f);
            let oracle = oracle_row_values((&a, &b), (&k, &kr)).unwrap();
            for (row, want) in oracle.iter().enumerate() {
                let got = v.rows.iter().find(|r| r.family == f && r.row == row).unwrap();
                assert_eq!(got.passes(TOL), *want <= TOL, "instance {i} {f} row {row}: {} vs {want}", got.theta);
                if want.is_finite() {
                    assert!((got.theta - want).abs() <= 1e-7 * (1.0 + want.abs()), "instance {i} {f} row {row}");
                } else {
                    assert_eq!(got.theta, *want);
                    all_bounded &= *want == f64::NEG_INFINITY;
                }
                rows_checked += 1;
            }
        }
        if i < 200 {
            assert!(all_bounded, "instance {i} should be bounded");
            bounded_instances += 1;
        }
    }
    assert_eq!(bounded_instances, 200);
    assert!(rows_checked >= 300 * 3);
}

fn arb_triple() -> impl Strategy<Value = CascadeTriple> {
    (any::<u64>(), 0usize..4, any::<bool>())
        .prop_map(|(seed, d, bounded)| random_triple(&mut Gen::new(seed), small_dims()[d], bounded))
}

fn arb_horizon() -> impl Strategy<Value = HorizonConfig> {
    (1usize..=2, 1usize..=2).prop_map(|(a, b)| HorizonConfig::new(a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solver_calls_equal_conclusion_rows(t in arb_triple(), h in arb_horizon()) {
        let counter = CountingSolver::new(Simplex::default());
        let v = check_refinement_with(&counter, Execution::Parallel, &t, h, TOL).unwrap();
        let expected = t.upstream.num_assumptions() + t.downstream.num_assumptions() + t.composite.num_guarantees();
        prop_assert_eq!(counter.calls(), expected);
        prop_assert_eq!(v.lp_count, expected);
        prop_assert_eq!(
            expected,
            family_size(&t, Family::D) + family_size(&t, Family::Otimes) + family_size(&t, Family::Omega)
        );
    }

    #[test]
    fn loosening_the_composite_guarantee_never_hurts(t in arb_triple(), h in arb_horizon(), shift in 0.0f64..2.0) {
        let before = check_refinement(&t, h, TOL).unwrap();
        let mut loose = t.clone();
        loose.composite.guar_rhs.add_scalar_mut(shift);
        let after = check_refinement(&loose, h, TOL).unwrap();
        prop_assert!(!before.holds || after.holds);
        for (a, b) in before.theta_omega.iter().zip(&after.theta_omega) {
            if a.is_finite() {
                prop_assert!((b - (a - shift)).abs() <= 1e-7 * (1.0 + a.abs()));
            } else {
                prop_assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn tightening_composite_assumptions_never_raises_theta(t in arb_triple(), h in arb_horizon(), shift in 0.0f64..0.25) {
        let before = check_refinement(&t, h, TOL).unwrap();
        let mut tight = t.clone();
        tight.composite.assume_rhs.add_scalar_mut(-shift);
        let after = check_refinement(&tight, h, TOL).unwrap();
        for (a, b) in before.rows.iter().zip(&after.rows) {
            prop_assert!(b.theta <= a.theta + 1e-7 * (1.0 + a.theta.abs()), "{} > {}", b.theta, a.theta);
        }
    }

    #[test]
    fn witnesses_are_feasible_and_attain_theta(t in arb_triple(), h in arb_horizon()) {
        let v = check_refinement(&t, h, TOL).unwrap();
        for r in &v.rows {
            let lp = row_problem(&t, h, r.family, r.row).unwrap();
            if let Some(w) = &r.witness {
                prop_assert!(r.theta > 0.0);
                prop_assert!(lp.problem.is_feasible_point(w));
                prop_assert!((lp.evaluate(w) - r.theta).abs() <= 1e-7 * (1.0 + r.theta.abs()));
            }
            if let Some(ray) = &r.ray {
                prop_assert_eq!(r.status, RowStatus::Unbounded);
                prop_assert!(lp.problem.is_improving_ray(ray));
            }
        }
    }

    #[test]
    fn sequential_and_parallel_agree(t in arb_triple(), h in arb_horizon()) {
        let s = Simplex::default();
        let a = check_refinement_with(&s, Execution::Sequential, &t, h, TOL).unwrap();
        let b = check_refinement_with(&s, Execution::Parallel, &t, h, TOL).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn contradictory_composite_assumptions_hold_vacuously() {
    let mut t = build_triple(&CaseStudyParams::default());
    // p_l(k+1) − p_l(k) − Δt v_l(k) ≤ 0 and ≥ 1 at once.
    t.composite.assume_rhs[1] = -1.0;
    let v = check_refinement(&t, h22(), TOL).unwrap();
    assert!(v.holds);
    assert!(v.rows.iter().all(|r| r.status == RowStatus::Infeasible && r.theta == f64::NEG_INFINITY));
    let lp = row_problem(&t, h22(), Family::Omega, 0).unwrap();
    assert_eq!(solve(&lp.problem).unwrap(), LpOutcome::Infeasible);
}

#[test]
fn verdict_json_encodes_infinities() {
    let t = build_triple(&CaseStudyParams::default());
    let v = check_refinement(&t, HorizonConfig::default(), TOL).unwrap();
    let json = serde_json::to_value(&v).unwrap();
    assert_eq!(json["rho_omega"], "+inf");
    assert_eq!(json["horizon"]["horizon_ii"], 1);
    assert_eq!(json["rows"][5]["family"], "otimes");
}

// --- extendability -----------------------------------------------------------

#[test]
fn trivial_one_dimensional_triple_is_extendable() {
    let v = check_extendability(&row_matrix(&[&[1.0]]), &row_matrix(&[&[0.0]]), &vector(&[1.0])).unwrap();
    assert!(v.is_supported());
    assert!(v.extendable);
    assert!(v.counterexample.is_none());
}

#[test]
fn drifting_lower_bound_is_not_extendable() {
    // u₁ ≥ u₀ + 1 and u₁ ≤ 1: (0, 1) cannot continue since u₂ ≥ 2 > 1.
    let v1 = row_matrix(&[&[-1.0], &[1.0]]);
    let v0 = row_matrix(&[&[1.0], &[0.0]]);
    let v = check_extendability(&v1, &v0, &vector(&[-1.0, 1.0])).unwrap();
    assert!(v.is_supported());
    assert!(!v.extendable);
    assert!(v.counterexample.is_some());
}

#[test]
fn nine_dimensional_pairs_are_unsupported() {
    let n = 5;
    let v = check_extendability(&DMatrix::identity(n, n), &DMatrix::zeros(n, n), &DVector::from_element(n, 1.0))
        .unwrap();
    assert_eq!(v.method, ExtendMethod::UnsupportedDimension);
    assert_eq!(v.dimension, 10);
    assert!(!v.extendable);
}

/// `u₀, u₁` satisfy the triple but no `u₂` does.
fn assert_dead_end(t: &linag_core::refinement::ExtendableTriple, u0: &DVector<f64>, u1: &DVector<f64>) {
    let slack = &t.rhs - &t.v1 * u1 - &t.v0 * u0;
    assert!(slack.iter().all(|&s| s >= -1e-7), "pair violates the triple: {slack}");
    let next = LpProblem::new(DVector::zeros(u1.len()), t.v1.clone(), &t.rhs - &t.v0 * u1).unwrap();
    assert_eq!(solve(&next).unwrap(), LpOutcome::Infeasible);
}

#[test]
fn case_study_stacked_triples() {
    let t = build_triple(&CaseStudyParams::default());
    let triples = stacked_triples(&t);
    assert_eq!(triples.len(), 3);

    let dims: Vec<usize> = triples.iter().map(|x| 2 * x.v1.ncols()).collect();
    assert_eq!(dims, [4, 8, 12]);

    // The leader assumptions bound v_l(k) ≥ 0 only at the current step, so a
    // pair ending in a negative velocity is admissible but cannot continue.
    for x in &triples[..2] {
        let v = check_extendability(&x.v1, &x.v0, &x.rhs).unwrap();
        assert!(v.is_supported(), "{}", x.name);
        assert!(!v.extendable, "{}", x.name);
        let ce = v.counterexample.expect("counterexample");
        assert_dead_end(x, &ce.u0, &ce.u1);
    }
    let v = check_extendability(&triples[2].v1, &triples[2].v0, &triples[2].rhs).unwrap();
    assert_eq!(v.method, ExtendMethod::UnsupportedDimension);
    assert_eq!(v.dimension, 12);
}
