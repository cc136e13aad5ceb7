//! Dense linear programs over free variables.
//!
//! Every program is in maximize form: `max c·x  s.t.  A·x ≤ b`, with `x`
//! unrestricted in sign. [`solve`] classifies the program as optimal,
//! infeasible or unbounded and returns a certificate point or ray that can be
//! re-checked against the raw data.

mod simplex;
pub mod vrep;

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub use simplex::{Simplex, SimplexOptions};
pub use vrep::{enumerate_v_rep, PolyhedronVRep, VrepError, MAX_VREP_DIM, MAX_VREP_ROWS};

/// Absolute feasibility tolerance before scaling by `1 + ‖b‖∞`.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Tolerance used when comparing objective values.
pub const VALUE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("objective has {objective} entries but the constraint matrix has {columns} columns")]
    ObjectiveLength { objective: usize, columns: usize },
    #[error("rhs has {rhs} entries but the constraint matrix has {rows} rows")]
    RhsLength { rhs: usize, rows: usize },
    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },
    #[error("simplex exceeded its pivot budget of {budget} pivots")]
    PivotBudget { budget: usize },
}

/// `max objective·x  s.t.  constraint_matrix·x ≤ rhs`, `x` free.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    objective: DVector<f64>,
    constraint_matrix: DMatrix<f64>,
    rhs: DVector<f64>,
}

impl LpProblem {
    pub fn new(
        objective: DVector<f64>,
        constraint_matrix: DMatrix<f64>,
        rhs: DVector<f64>,
    ) -> Result<Self, LpError> {
        if objective.len() != constraint_matrix.ncols() {
            return Err(LpError::ObjectiveLength {
                objective: objective.len(),
                columns: constraint_matrix.ncols(),
            });
        }
        if rhs.len() != constraint_matrix.nrows() {
            return Err(LpError::RhsLength { rhs: rhs.len(), rows: constraint_matrix.nrows() });
        }
        check_finite("objective", objective.iter())?;
        check_finite("constraint_matrix", constraint_matrix.iter())?;
        check_finite("rhs", rhs.iter())?;
        Ok(Self { objective, constraint_matrix, rhs })
    }

    pub fn objective(&self) -> &DVector<f64> {
        &self.objective
    }

    pub fn constraint_matrix(&self) -> &DMatrix<f64> {
        &self.constraint_matrix
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rhs.len()
    }

    /// Feasibility tolerance for this problem: `1e-9·(1 + ‖b‖∞)`.
    pub fn feasibility_tol(&self) -> f64 {
        FEASIBILITY_TOL * (1.0 + self.rhs.amax())
    }

    /// Largest constraint violation `max_i (A x − b)_i`, clamped at zero.
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        let residual = &self.constraint_matrix * x - &self.rhs;
        residual.iter().fold(0.0_f64, |acc, &v| acc.max(v))
    }

    pub fn is_feasible_point(&self, x: &DVector<f64>) -> bool {
        x.len() == self.num_vars() && self.max_violation(x) <= self.feasibility_tol()
    }

    /// A recession direction that strictly improves the objective.
    pub fn is_improving_ray(&self, ray: &DVector<f64>) -> bool {
        if ray.len() != self.num_vars() {
            return false;
        }
        let scale = ray.amax().max(f64::MIN_POSITIVE);
        let unit = ray / scale;
        let drift = &self.constraint_matrix * &unit;
        drift.iter().all(|&v| v <= self.feasibility_tol()) && self.objective.dot(&unit) > 0.0
    }
}

fn check_finite<'a>(what: &'static str, it: impl Iterator<Item = &'a f64>) -> Result<(), LpError> {
    for (index, v) in it.enumerate() {
        if !v.is_finite() {
            return Err(LpError::NonFinite { what, index });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, point: DVector<f64> },
    Infeasible,
    Unbounded { ray: DVector<f64> },
}

impl LpOutcome {
    pub fn status_name(&self) -> &'static str {
        match self {
            LpOutcome::Optimal { .. } => "optimal",
            LpOutcome::Infeasible => "infeasible",
            LpOutcome::Unbounded { .. } => "unbounded",
        }
    }

    /// Optimal value as an extended real: `-inf` when infeasible, `+inf` when unbounded.
    pub fn extended_value(&self) -> f64 {
        match self {
            LpOutcome::Optimal { value, .. } => *value,
            LpOutcome::Infeasible => f64::NEG_INFINITY,
            LpOutcome::Unbounded { .. } => f64::INFINITY,
        }
    }
}

/// Anything that can solve an [`LpProblem`].
pub trait LpSolver: Sync {
    fn solve(&self, problem: &LpProblem) -> Result<LpOutcome, LpError>;
}

impl<S: LpSolver + ?Sized> LpSolver for &S {
    fn solve(&self, problem: &LpProblem) -> Result<LpOutcome, LpError> {
        (**self).solve(problem)
    }
}

/// Wraps a solver and counts how many programs it was asked to solve.
#[derive(Debug, Default)]
pub struct CountingSolver<S> {
    inner: S,
    calls: AtomicUsize,
}

impl<S> CountingSolver<S> {
    pub fn new(inner: S) -> Self {
        Self { inner, calls: AtomicUsize::new(0) }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::SeqCst);
    }
}

impl<S: LpSolver> LpSolver for CountingSolver<S> {
    fn solve(&self, problem: &LpProblem) -> Result<LpOutcome, LpError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.solve(problem)
    }
}

/// Solves with the default two-phase simplex.
pub fn solve(problem: &LpProblem) -> Result<LpOutcome, LpError> {
    Simplex::default().solve(problem)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(c: &[f64], a: &[&[f64]], b: &[f64]) -> LpProblem {
        let n = c.len();
        let rows: Vec<f64> = a.iter().flat_map(|r| r.iter().copied()).collect();
        LpProblem::new(
            DVector::from_column_slice(c),
            DMatrix::from_row_slice(a.len(), n, &rows),
            DVector::from_column_slice(b),
        )
        .unwrap()
    }

    #[test]
    fn single_binding_constraint() {
        let out = solve(&lp(&[1.0], &[&[1.0]], &[1.0])).unwrap();
        match out {
            LpOutcome::Optimal { value, point } => {
                assert!((value - 1.0).abs() < 1e-12);
                assert!((point[0] - 1.0).abs() < 1e-12);
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn contradictory_bounds() {
        let out = solve(&lp(&[1.0], &[&[1.0], &[-1.0]], &[1.0, -2.0])).unwrap();
        assert_eq!(out, LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded_half_line() {
        let p = lp(&[1.0], &[&[-1.0]], &[0.0]);
        match solve(&p).unwrap() {
            LpOutcome::Unbounded { ray } => {
                assert!(ray[0] > 0.0);
                assert!(p.is_improving_ray(&ray));
            }
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = LpProblem::new(
            DVector::from_element(2, 1.0),
            DMatrix::zeros(1, 3),
            DVector::zeros(1),
        )
        .unwrap_err();
        assert_eq!(err, LpError::ObjectiveLength { objective: 2, columns: 3 });
        let err =
            LpProblem::new(DVector::zeros(3), DMatrix::zeros(2, 3), DVector::zeros(1)).unwrap_err();
        assert_eq!(err, LpError::RhsLength { rhs: 1, rows: 2 });
        let err = LpProblem::new(
            DVector::from_element(1, f64::NAN),
            DMatrix::zeros(0, 1),
            DVector::zeros(0),
        )
        .unwrap_err();
        assert!(matches!(err, LpError::NonFinite { what: "objective", .. }));
    }

    #[test]
    fn no_variables() {
        let feasible = lp(&[], &[&[], &[]], &[0.0, 1.0]);
        assert!(matches!(solve(&feasible).unwrap(), LpOutcome::Optimal { value, .. } if value == 0.0));
        let infeasible = lp(&[], &[&[]], &[-1.0]);
        assert_eq!(solve(&infeasible).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn no_constraints() {
        let zero = lp(&[0.0, 0.0], &[], &[]);
        assert!(matches!(solve(&zero).unwrap(), LpOutcome::Optimal { value, .. } if value == 0.0));
        let p = lp(&[1.0, -2.0], &[], &[]);
        assert!(matches!(solve(&p).unwrap(), LpOutcome::Unbounded { ray } if p.is_improving_ray(&ray)));
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // Beale's classic cycling instance, nonnegativity written as rows.
        let p = lp(
            &[0.75, -150.0, 0.02, -6.0],
            &[
                &[0.25, -60.0, -0.04, 9.0],
                &[0.5, -90.0, -0.02, 3.0],
                &[0.0, 0.0, 1.0, 0.0],
                &[-1.0, 0.0, 0.0, 0.0],
                &[0.0, -1.0, 0.0, 0.0],
                &[0.0, 0.0, -1.0, 0.0],
                &[0.0, 0.0, 0.0, -1.0],
            ],
            &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        );
        match solve(&p).unwrap() {
            LpOutcome::Optimal { value, point } => {
                assert!((value - 0.05).abs() < 1e-9, "value {value}");
                assert!(p.is_feasible_point(&point));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn counting_solver_counts() {
        let s = CountingSolver::new(Simplex::default());
        let p = lp(&[1.0], &[&[1.0]], &[1.0]);
        s.solve(&p).unwrap();
        s.solve(&p).unwrap();
        assert_eq!(s.calls(), 2);
        s.reset();
        assert_eq!(s.calls(), 0);
    }

    #[test]
    fn pivot_budget_is_a_hard_error() {
        let s = Simplex::new(SimplexOptions { max_pivots: 1, ..SimplexOptions::default() });
        let p = lp(&[1.0, 1.0], &[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 1.0]);
        assert_eq!(s.solve(&p).unwrap_err(), LpError::PivotBudget { budget: 1 });
    }
}
