//! Vertex and extreme-ray enumeration for small H-polyhedra `{x : A x ≤ b}`.
//!
//! The lineality space `null(A)` is split off first and reported as a pair of
//! opposite rays per basis vector. What remains is pointed, so its vertices
//! are the feasible basic solutions: choose `d` active rows (`d` being the
//! dimension of the lineality complement), solve, keep the feasible ones.
//! Extreme rays of the recession cone come from `d − 1` active rows in the
//! same way. The search is exhaustive, hence the hard size caps.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub const MAX_VREP_DIM: usize = 8;
pub const MAX_VREP_ROWS: usize = 24;

const RANK_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;
const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VrepError {
    #[error(
        "vertex enumeration supports at most {MAX_VREP_DIM} dimensions and {MAX_VREP_ROWS} rows, \
         got {dim} dimensions and {rows} rows"
    )]
    LimitExceeded { dim: usize, rows: usize },
    #[error("constraint matrix has {rows} rows but rhs has {rhs} entries")]
    RhsLength { rows: usize, rhs: usize },
}

/// Vertices and rays of a polyhedron. Both lists are empty iff the polyhedron is empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolyhedronVRep {
    pub vertices: Vec<DVector<f64>>,
    pub rays: Vec<DVector<f64>>,
}

impl PolyhedronVRep {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.rays.is_empty()
    }

    /// `sup objective·x` over the polyhedron; `+inf` if some ray improves it,
    /// `-inf` if the polyhedron is empty.
    pub fn support(&self, objective: &DVector<f64>) -> f64 {
        if self.vertices.is_empty() {
            return f64::NEG_INFINITY;
        }
        if self.rays.iter().any(|r| objective.dot(r) > FEAS_TOL * (1.0 + objective.amax())) {
            return f64::INFINITY;
        }
        self.vertices.iter().map(|v| objective.dot(v)).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn check_limits(dim: usize, rows: usize) -> Result<(), VrepError> {
    if dim > MAX_VREP_DIM || rows > MAX_VREP_ROWS {
        return Err(VrepError::LimitExceeded { dim, rows });
    }
    Ok(())
}

pub fn enumerate_v_rep(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<PolyhedronVRep, VrepError> {
    let (m, n) = (a.nrows(), a.ncols());
    if b.len() != m {
        return Err(VrepError::RhsLength { rows: m, rhs: b.len() });
    }
    check_limits(n, m)?;
    let feas_tol = FEAS_TOL * (1.0 + b.amax());

    if n == 0 {
        let nonempty = b.iter().all(|&v| v >= -feas_tol);
        return Ok(PolyhedronVRep {
            vertices: if nonempty { vec![DVector::zeros(0)] } else { vec![] },
            rays: vec![],
        });
    }

    let lineality = null_space(a);
    let k = lineality.ncols();
    let d = n - k;
    let equalities = lineality.transpose();

    let mut vertices: Vec<DVector<f64>> = Vec::new();
    for subset in (0..m).combinations(d) {
        let mut sys = DMatrix::zeros(n, n);
        let mut rhs = DVector::zeros(n);
        for (r, &i) in subset.iter().enumerate() {
            sys.set_row(r, &a.row(i));
            rhs[r] = b[i];
        }
        for r in 0..k {
            sys.set_row(d + r, &equalities.row(r));
        }
        let Some(x) = solve_square(&sys, &rhs) else { continue };
        let slack = a * &x - b;
        if slack.iter().all(|&s| s <= feas_tol) && !contains(&vertices, &x) {
            vertices.push(x);
        }
    }
    if vertices.is_empty() {
        return Ok(PolyhedronVRep::default());
    }

    let mut rays: Vec<DVector<f64>> = Vec::new();
    if d > 0 {
        for subset in (0..m).combinations(d - 1) {
            let mut sys = DMatrix::zeros(n - 1, n);
            for (r, &i) in subset.iter().enumerate() {
                sys.set_row(r, &a.row(i));
            }
            for r in 0..k {
                sys.set_row(d - 1 + r, &equalities.row(r));
            }
            let dirs = null_space(&sys);
            if dirs.ncols() != 1 {
                continue;
            }
            let dir = normalize(dirs.column(0).into_owned());
            for cand in [dir.clone(), -dir] {
                let drift = a * &cand;
                if drift.iter().all(|&s| s <= FEAS_TOL) && !contains(&rays, &cand) {
                    rays.push(cand);
                }
            }
        }
    }
    for col in lineality.column_iter() {
        let l = normalize(col.into_owned());
        rays.push(l.clone());
        rays.push(-l);
    }
    Ok(PolyhedronVRep { vertices, rays })
}

/// Orthonormal basis (as columns) of the null space of `a`.
pub(crate) fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad to at least n rows so the SVD returns a full right basis.
    let rows = a.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let scale = svd.singular_values.max().max(1.0);
    let null: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= RANK_TOL * scale).collect();
    DMatrix::from_fn(n, null.len(), |r, c| v_t[(null[c], r)])
}

fn solve_square(sys: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = sys.clone().full_piv_lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].abs()).collect();
    let max = diag.iter().copied().fold(0.0, f64::max);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 || min <= RANK_TOL * max.max(1.0) {
        return None;
    }
    lu.solve(rhs)
}

fn normalize(v: DVector<f64>) -> DVector<f64> {
    let s = v.amax();
    if s > 0.0 { v / s } else { v }
}

fn contains(list: &[DVector<f64>], x: &DVector<f64>) -> bool {
    list.iter().any(|y| (y - x).amax() <= DEDUP_TOL * (1.0 + x.amax()))
}
