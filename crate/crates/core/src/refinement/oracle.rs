//! Brute-force implication check by vertex enumeration, independent of the
//! simplex path. Only usable on small premise polyhedra.

use nalgebra::{DMatrix, DVector};

use super::DEFAULT_TOLERANCE;
use crate::lp::vrep::{enumerate_v_rep, VrepError};

/// `sup (K_r x − k_r)` over `{x : A x ≤ b}` for every conclusion row `r`.
pub fn oracle_row_values(
    premise: (&DMatrix<f64>, &DVector<f64>),
    conclusion: (&DMatrix<f64>, &DVector<f64>),
) -> Result<Vec<f64>, VrepError> {
    let vrep = enumerate_v_rep(premise.0, premise.1)?;
    let (k, rhs) = conclusion;
    Ok((0..k.nrows())
        .map(|r| vrep.support(&k.row(r).transpose()) - rhs[r])
        .collect())
}

/// Whether `A x ≤ b` implies `K x ≤ k`, up to the default refinement tolerance.
pub fn oracle_check_implication(
    premise: (&DMatrix<f64>, &DVector<f64>),
    conclusion: (&DMatrix<f64>, &DVector<f64>),
) -> Result<bool, VrepError> {
    Ok(oracle_row_values(premise, conclusion)?.iter().all(|&v| v <= DEFAULT_TOLERANCE))
}
