//! Extendability of a one-step constraint triple `(V¹, V⁰, v⁰)`: every pair
//! `(u₀, u₁)` with `V¹u₁ + V⁰u₀ ≤ v⁰` admits some `u₂` with
//! `V¹u₂ + V⁰u₁ ≤ v⁰`.
//!
//! The pairs form a polyhedron `P`; the `u₁` for which a continuation exists
//! form a convex set `T`. The projection of `P` onto `u₁` is the hull of the
//! projected vertices plus the cone of the projected rays, so it suffices to
//! check every projected vertex against `T` and every projected ray against
//! the recession cone of `T`. Both checks are feasibility LPs.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::contracts::CascadeTriple;
use crate::lp::vrep::{check_limits, enumerate_v_rep, VrepError};
use crate::lp::{LpError, LpOutcome, LpProblem, LpSolver, Simplex};
use crate::mat::RowBuilder;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtendError {
    #[error("V1 is {v1_rows}x{v1_cols}, V0 is {v0_rows}x{v0_cols} and v0 has {rhs} entries")]
    Dimension { v1_rows: usize, v1_cols: usize, v0_rows: usize, v0_cols: usize, rhs: usize },
    #[error(transparent)]
    Vrep(#[from] VrepError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtendMethod {
    ExactVrep,
    UnsupportedDimension,
}

/// A pair `(u₀, u₁)` that satisfies the triple but cannot be continued.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    #[serde(serialize_with = "ser_vec")]
    pub u0: DVector<f64>,
    #[serde(serialize_with = "ser_vec")]
    pub u1: DVector<f64>,
    /// Whether the pair is a vertex of `P` or a point far along a ray of it.
    pub from_ray: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtendabilityVerdict {
    /// Meaningless (false) when `method` is `UnsupportedDimension`.
    pub extendable: bool,
    pub method: ExtendMethod,
    /// Dimension of the pair space `(u₀, u₁)` and number of rows of `P`.
    pub dimension: usize,
    pub rows: usize,
    pub counterexample: Option<Counterexample>,
    pub vertices_checked: usize,
    pub rays_checked: usize,
}

impl ExtendabilityVerdict {
    pub fn is_supported(&self) -> bool {
        self.method == ExtendMethod::ExactVrep
    }
}

fn ser_vec<S: serde::Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter())
}

pub fn check_extendability(
    v1: &DMatrix<f64>,
    v0: &DMatrix<f64>,
    rhs: &DVector<f64>,
) -> Result<ExtendabilityVerdict, ExtendError> {
    check_extendability_with(&Simplex::default(), v1, v0, rhs)
}

pub fn check_extendability_with<S: LpSolver>(
    solver: &S,
    v1: &DMatrix<f64>,
    v0: &DMatrix<f64>,
    rhs: &DVector<f64>,
) -> Result<ExtendabilityVerdict, ExtendError> {
    let (m, n) = v1.shape();
    if v0.shape() != (m, n) || rhs.len() != m {
        return Err(ExtendError::Dimension {
            v1_rows: m,
            v1_cols: n,
            v0_rows: v0.nrows(),
            v0_cols: v0.ncols(),
            rhs: rhs.len(),
        });
    }
    let mut verdict = ExtendabilityVerdict {
        extendable: false,
        method: ExtendMethod::ExactVrep,
        dimension: 2 * n,
        rows: m,
        counterexample: None,
        vertices_checked: 0,
        rays_checked: 0,
    };
    if check_limits(2 * n, m).is_err() {
        verdict.method = ExtendMethod::UnsupportedDimension;
        return Ok(verdict);
    }

    // P over (u₀, u₁): [V⁰ V¹] ≤ v⁰.
    let mut rows = RowBuilder::new(2 * n);
    rows.push_blocks(&[(0, v0), (n, v1)], rhs);
    let (pa, pb) = rows.build();
    let vrep = enumerate_v_rep(&pa, &pb)?;

    let continues = |u1: &DVector<f64>| -> Result<bool, LpError> {
        let b = rhs - v0 * u1;
        let lp = LpProblem::new(DVector::zeros(n), v1.clone(), b)?;
        Ok(!matches!(solver.solve(&lp)?, LpOutcome::Infeasible))
    };

    for x in &vrep.vertices {
        verdict.vertices_checked += 1;
        let u1 = x.rows(n, n).into_owned();
        if !continues(&u1)? {
            verdict.counterexample =
                Some(Counterexample { u0: x.rows(0, n).into_owned(), u1, from_ray: false });
            return Ok(verdict);
        }
    }
    for r in &vrep.rays {
        verdict.rays_checked += 1;
        let r1 = r.rows(n, n).into_owned();
        let lp = LpProblem::new(DVector::zeros(n), v1.clone(), -(v0 * &r1))?;
        if matches!(solver.solve(&lp)?, LpOutcome::Infeasible) {
            // Walk out along the ray until the continuation disappears.
            let base = &vrep.vertices[0];
            let mut t = 1.0;
            for _ in 0..64 {
                let x = base + r * t;
                let u1 = x.rows(n, n).into_owned();
                if !continues(&u1)? {
                    verdict.counterexample =
                        Some(Counterexample { u0: x.rows(0, n).into_owned(), u1, from_ray: true });
                    break;
                }
                t *= 2.0;
            }
            return Ok(verdict);
        }
    }
    verdict.extendable = true;
    Ok(verdict)
}

/// One of the stacked triples that must be extendable for the inductive
/// refinement argument to go through.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendableTriple {
    pub name: &'static str,
    pub v1: DMatrix<f64>,
    pub v0: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

/// The composite assumptions alone; stacked with the upstream guarantees over
/// `(d, z)`; and stacked with both guarantees over `(d, z, y)`.
pub fn stacked_triples(t: &CascadeTriple) -> Vec<ExtendableTriple> {
    let (nd, nz, ny) = (t.input_dim(), t.intermediate_dim(), t.output_dim());
    let c = &t.composite;
    let g = t.upstream.split_guarantees();
    let h = t.downstream.split_guarantees();

    let stack = |with_g: bool, with_h: bool| {
        let cols = nd + if with_g { nz } else { 0 } + if with_h { ny } else { 0 };
        let mut next = RowBuilder::new(cols);
        let mut now = RowBuilder::new(cols);
        next.push_blocks(&[(0, &c.assume_next)], &c.assume_rhs);
        now.push_blocks(&[(0, &c.assume_now)], &c.assume_rhs);
        let mut rhs: Vec<f64> = c.assume_rhs.iter().copied().collect();
        if with_g {
            next.push_blocks(&[(0, &g.next_input), (nd, &g.next_output)], &t.upstream.guar_rhs);
            now.push_blocks(&[(0, &g.now_input), (nd, &g.now_output)], &t.upstream.guar_rhs);
            rhs.extend(t.upstream.guar_rhs.iter());
        }
        if with_h {
            next.push_blocks(&[(nd, &h.next_input), (nd + nz, &h.next_output)], &t.downstream.guar_rhs);
            now.push_blocks(&[(nd, &h.now_input), (nd + nz, &h.now_output)], &t.downstream.guar_rhs);
            rhs.extend(t.downstream.guar_rhs.iter());
        }
        (next.build().0, now.build().0, DVector::from_vec(rhs))
    };

    [("assumptions", false, false), ("assumptions+upstream", true, false), ("assumptions+both", true, true)]
        .into_iter()
        .map(|(name, with_g, with_h)| {
            let (v1, v0, rhs) = stack(with_g, with_h);
            ExtendableTriple { name, v1, v0, rhs }
        })
        .collect()
}
