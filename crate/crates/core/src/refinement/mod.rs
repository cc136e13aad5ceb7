//! Deciding `C₁ ⊗ C₂ ≼ C` for a cascade of linear contracts.
//!
//! Refinement reduces to three families of implications, each checked one
//! conclusion row at a time by a linear program:
//!
//! * **D**: composite assumptions imply upstream assumptions,
//! * **⊗**: composite assumptions plus upstream guarantees imply downstream
//!   assumptions,
//! * **Ω**: composite assumptions plus both guarantees imply the composite
//!   guarantees.
//!
//! Each LP maximises one conclusion row minus its right-hand side over the
//! premise polyhedron. Refinement holds iff every such value is non-positive,
//! so exactly `s_A + s_B + s_J` programs are solved.
//!
//! For contracts whose guarantees only start constraining the output one step
//! late, the ⊗ and Ω families can be stretched to a two-step horizon: premises
//! are imposed at steps 0 and 1 and the conclusion is checked on step 1.

mod extend;
mod oracle;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::contracts::CascadeTriple;
use crate::exec::{self, Execution};
use crate::lp::{LpError, LpProblem, LpSolver, Simplex};
use crate::mat::RowBuilder;
use crate::verdict::{max_or_neg_inf, RowResult, RowStatus};

pub use extend::{
    check_extendability, check_extendability_with, stacked_triples, Counterexample,
    ExtendMethod, ExtendabilityVerdict, ExtendableTriple, ExtendError,
};
pub use oracle::{oracle_check_implication, oracle_row_values};

/// Default non-positivity tolerance for `ϑ` values.
pub const DEFAULT_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefinementError {
    #[error("{family} row {row} out of range (family has {count} rows)")]
    RowIndex { family: Family, row: usize, count: usize },
    #[error("horizon must be 1 or 2, got {0}")]
    Horizon(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    #[serde(rename = "D")]
    D,
    #[serde(rename = "otimes")]
    Otimes,
    #[serde(rename = "Omega")]
    Omega,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::D => "D",
            Family::Otimes => "otimes",
            Family::Omega => "Omega",
        })
    }
}

/// How many steps of signal the ⊗ and Ω implications look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HorizonConfig {
    pub horizon_ii: usize,
    pub horizon_iii: usize,
}

impl Default for HorizonConfig {
    fn default() -> Self {
        Self { horizon_ii: 1, horizon_iii: 1 }
    }
}

impl HorizonConfig {
    pub fn new(horizon_ii: usize, horizon_iii: usize) -> Result<Self, RefinementError> {
        for h in [horizon_ii, horizon_iii] {
            if !(1..=2).contains(&h) {
                return Err(RefinementError::Horizon(h));
            }
        }
        Ok(Self { horizon_ii, horizon_iii })
    }

    /// Proposes a two-step horizon for a family whose relevant guarantee does
    /// not constrain its output at the current step.
    pub fn suggest(t: &CascadeTriple) -> Self {
        let upstream_delayed = t.upstream.output_now_is_zero();
        let downstream_delayed = t.downstream.output_now_is_zero();
        Self {
            horizon_ii: if upstream_delayed { 2 } else { 1 },
            horizon_iii: if upstream_delayed || downstream_delayed { 2 } else { 1 },
        }
    }

    fn for_family(&self, family: Family) -> usize {
        match family {
            Family::D => 1,
            Family::Otimes => self.horizon_ii,
            Family::Omega => self.horizon_iii,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Signal {
    #[serde(rename = "d")]
    Input,
    #[serde(rename = "z")]
    Intermediate,
    #[serde(rename = "y")]
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VariableBlock {
    pub signal: Signal,
    pub step: usize,
    pub offset: usize,
    pub len: usize,
}

/// Which LP coordinates hold which signal sample.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariableLayout {
    pub blocks: Vec<VariableBlock>,
    pub num_vars: usize,
}

impl VariableLayout {
    fn new(signals: &[(Signal, usize)], slices: usize) -> Self {
        let mut blocks = Vec::new();
        let mut offset = 0;
        for &(signal, len) in signals {
            for step in 0..slices {
                blocks.push(VariableBlock { signal, step, offset, len });
                offset += len;
            }
        }
        Self { blocks, num_vars: offset }
    }

    pub fn offset(&self, signal: Signal, step: usize) -> usize {
        self.blocks
            .iter()
            .find(|b| b.signal == signal && b.step == step)
            .map(|b| b.offset)
            .unwrap_or_else(|| panic!("no {signal:?} block at step {step}"))
    }

    /// The sub-vector of `x` holding `signal` at `step`.
    pub fn slice(&self, x: &DVector<f64>, signal: Signal, step: usize) -> DVector<f64> {
        let b = self.blocks.iter().find(|b| b.signal == signal && b.step == step).expect("block");
        x.rows(b.offset, b.len).into_owned()
    }
}

/// One implication LP. The reported `ϑ` is the LP value plus `constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplicationLp {
    pub family: Family,
    pub row: usize,
    pub horizon: usize,
    pub problem: LpProblem,
    pub constant: f64,
    pub layout: VariableLayout,
}

impl ImplicationLp {
    /// `ϑ` evaluated at an arbitrary point (objective plus constant).
    pub fn evaluate(&self, x: &DVector<f64>) -> f64 {
        self.problem.objective().dot(x) + self.constant
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImplicationLpSet {
    pub family: Family,
    pub layout: VariableLayout,
    pub problems: Vec<ImplicationLp>,
}

/// Premise rows for `family` over `horizon` steps: composite assumptions,
/// then (⊗, Ω) upstream guarantees, then (Ω) downstream guarantees, each at
/// every step `k < horizon`.
pub fn premise_rows(
    t: &CascadeTriple,
    family: Family,
    horizon: usize,
) -> (VariableLayout, DMatrix<f64>, DVector<f64>) {
    let (nd, nz, ny) = (t.input_dim(), t.intermediate_dim(), t.output_dim());
    let slices = horizon + 1;
    let signals: &[(Signal, usize)] = match family {
        Family::D => &[(Signal::Input, nd)],
        Family::Otimes => &[(Signal::Input, nd), (Signal::Intermediate, nz)],
        Family::Omega => &[(Signal::Input, nd), (Signal::Intermediate, nz), (Signal::Output, ny)],
    };
    let layout = VariableLayout::new(signals, slices);
    let c = &t.composite;
    let g = t.upstream.split_guarantees();
    let h = t.downstream.split_guarantees();

    let mut rows = RowBuilder::new(layout.num_vars);
    for k in 0..horizon {
        let d0 = layout.offset(Signal::Input, k);
        let d1 = layout.offset(Signal::Input, k + 1);
        rows.push_blocks(&[(d1, &c.assume_next), (d0, &c.assume_now)], &c.assume_rhs);
        if family == Family::D {
            continue;
        }
        let z0 = layout.offset(Signal::Intermediate, k);
        let z1 = layout.offset(Signal::Intermediate, k + 1);
        rows.push_blocks(
            &[(d1, &g.next_input), (z1, &g.next_output), (d0, &g.now_input), (z0, &g.now_output)],
            &t.upstream.guar_rhs,
        );
        if family == Family::Omega {
            let y0 = layout.offset(Signal::Output, k);
            let y1 = layout.offset(Signal::Output, k + 1);
            rows.push_blocks(
                &[(z1, &h.next_input), (y1, &h.next_output), (z0, &h.now_input), (y0, &h.now_output)],
                &t.downstream.guar_rhs,
            );
        }
    }
    let (a, b) = rows.build();
    (layout, a, b)
}

/// Conclusion rows `K x ≤ k` for `family`, checked on the last step.
pub fn conclusion_rows(
    t: &CascadeTriple,
    family: Family,
    layout: &VariableLayout,
    horizon: usize,
) -> (DMatrix<f64>, DVector<f64>) {
    let last = horizon;
    let mut rows = RowBuilder::new(layout.num_vars);
    match family {
        Family::D => {
            let a = &t.upstream;
            rows.push_blocks(
                &[
                    (layout.offset(Signal::Input, 1), &a.assume_next),
                    (layout.offset(Signal::Input, 0), &a.assume_now),
                ],
                &a.assume_rhs,
            );
        }
        Family::Otimes => {
            let b = &t.downstream;
            rows.push_blocks(
                &[
                    (layout.offset(Signal::Intermediate, last), &b.assume_next),
                    (layout.offset(Signal::Intermediate, last - 1), &b.assume_now),
                ],
                &b.assume_rhs,
            );
        }
        Family::Omega => {
            let j = t.composite.split_guarantees();
            rows.push_blocks(
                &[
                    (layout.offset(Signal::Input, last), &j.next_input),
                    (layout.offset(Signal::Output, last), &j.next_output),
                    (layout.offset(Signal::Input, last - 1), &j.now_input),
                    (layout.offset(Signal::Output, last - 1), &j.now_output),
                ],
                &t.composite.guar_rhs,
            );
        }
    }
    rows.build()
}

pub fn family_size(t: &CascadeTriple, family: Family) -> usize {
    match family {
        Family::D => t.upstream.num_assumptions(),
        Family::Otimes => t.downstream.num_assumptions(),
        Family::Omega => t.composite.num_guarantees(),
    }
}

fn build_row(
    t: &CascadeTriple,
    family: Family,
    row: usize,
    horizon: usize,
) -> Result<ImplicationLp, RefinementError> {
    if !(1..=2).contains(&horizon) {
        return Err(RefinementError::Horizon(horizon));
    }
    let count = family_size(t, family);
    if row >= count {
        return Err(RefinementError::RowIndex { family, row, count });
    }
    let (layout, a, b) = premise_rows(t, family, horizon);
    let (k, rhs) = conclusion_rows(t, family, &layout, horizon);
    let objective = k.row(row).transpose();
    let problem = LpProblem::new(objective, a, b)?;
    Ok(ImplicationLp { family, row, horizon, problem, constant: -rhs[row], layout })
}

/// Implication i) for row `row` of the upstream assumptions.
pub fn build_implication_d(t: &CascadeTriple, row: usize) -> Result<ImplicationLp, RefinementError> {
    build_row(t, Family::D, row, 1)
}

/// Implication ii) for row `row` of the downstream assumptions.
pub fn build_implication_otimes(
    t: &CascadeTriple,
    row: usize,
    h: HorizonConfig,
) -> Result<ImplicationLp, RefinementError> {
    build_row(t, Family::Otimes, row, h.horizon_ii)
}

/// Implication iii) for row `row` of the composite guarantees.
pub fn build_implication_omega(
    t: &CascadeTriple,
    row: usize,
    h: HorizonConfig,
) -> Result<ImplicationLp, RefinementError> {
    build_row(t, Family::Omega, row, h.horizon_iii)
}

pub fn build_family(
    t: &CascadeTriple,
    family: Family,
    h: HorizonConfig,
) -> Result<ImplicationLpSet, RefinementError> {
    let horizon = h.for_family(family);
    let problems = (0..family_size(t, family))
        .map(|row| build_row(t, family, row, horizon))
        .collect::<Result<Vec<_>, _>>()?;
    let layout = premise_rows(t, family, horizon).0;
    Ok(ImplicationLpSet { family, layout, problems })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementVerdict {
    pub holds: bool,
    pub tolerance: f64,
    pub horizon: HorizonConfig,
    pub lp_count: usize,
    #[serde(serialize_with = "crate::verdict::ext_real::vec::serialize")]
    pub theta_d: Vec<f64>,
    #[serde(serialize_with = "crate::verdict::ext_real::vec::serialize")]
    pub theta_otimes: Vec<f64>,
    #[serde(serialize_with = "crate::verdict::ext_real::vec::serialize")]
    pub theta_omega: Vec<f64>,
    #[serde(serialize_with = "crate::verdict::ext_real::serialize")]
    pub rho_d: f64,
    #[serde(serialize_with = "crate::verdict::ext_real::serialize")]
    pub rho_otimes: f64,
    #[serde(serialize_with = "crate::verdict::ext_real::serialize")]
    pub rho_omega: f64,
    pub rows: Vec<RowResult<Family>>,
    pub unbounded_rows: Vec<(Family, usize)>,
}

impl RefinementVerdict {
    pub fn family_holds(&self, family: Family) -> bool {
        self.rows.iter().filter(|r| r.family == family).all(|r| r.passes(self.tolerance))
    }

    pub fn rho(&self, family: Family) -> f64 {
        match family {
            Family::D => self.rho_d,
            Family::Otimes => self.rho_otimes,
            Family::Omega => self.rho_omega,
        }
    }
}

pub fn check_refinement(
    t: &CascadeTriple,
    h: HorizonConfig,
    tol: f64,
) -> Result<RefinementVerdict, RefinementError> {
    check_refinement_with(&Simplex::default(), Execution::default(), t, h, tol)
}

/// Solves one LP per conclusion row, in parallel when `exec` allows it.
pub fn check_refinement_with<S: LpSolver>(
    solver: &S,
    exec: Execution,
    t: &CascadeTriple,
    h: HorizonConfig,
    tol: f64,
) -> Result<RefinementVerdict, RefinementError> {
    let mut lps = Vec::new();
    for family in [Family::D, Family::Otimes, Family::Omega] {
        lps.extend(build_family(t, family, h)?.problems);
    }
    let rows: Vec<RowResult<Family>> = exec::try_map_indexed(exec, lps.len(), |i| {
        let lp = &lps[i];
        let outcome = solver.solve(&lp.problem)?;
        Ok::<_, RefinementError>(RowResult::from_outcome(lp.family, lp.row, outcome, lp.constant))
    })?;

    let thetas = |f: Family| -> Vec<f64> {
        rows.iter().filter(|r| r.family == f).map(|r| r.theta).collect()
    };
    let (theta_d, theta_otimes, theta_omega) =
        (thetas(Family::D), thetas(Family::Otimes), thetas(Family::Omega));
    let unbounded_rows: Vec<(Family, usize)> = rows
        .iter()
        .filter(|r| r.status == RowStatus::Unbounded)
        .map(|r| (r.family, r.row))
        .collect();
    let holds = rows.iter().all(|r| r.passes(tol));
    Ok(RefinementVerdict {
        holds,
        tolerance: tol,
        horizon: h,
        lp_count: lps.len(),
        rho_d: max_or_neg_inf(&theta_d),
        rho_otimes: max_or_neg_inf(&theta_otimes),
        rho_omega: max_or_neg_inf(&theta_omega),
        theta_d,
        theta_otimes,
        theta_omega,
        rows,
        unbounded_rows,
    })
}

/// Rebuilds the LP behind a verdict row, for witness re-verification.
pub fn row_problem(
    t: &CascadeTriple,
    h: HorizonConfig,
    family: Family,
    row: usize,
) -> Result<ImplicationLp, RefinementError> {
    build_row(t, family, row, h.for_family(family))
}
