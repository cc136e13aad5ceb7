//! Does an affine closed loop `y(k+1) = F y(k) + B z(k) + f` implement a
//! linear contract with input `z` and output `y`?
//!
//! Proved by induction over `k`, one LP per guarantee row for each of
//!
//! * the **base** case: the guarantee holds on the first step, given the
//!   initial set (and, for guarantees that look one step ahead, the
//!   assumptions and dynamics of step 0);
//! * the **step** case: if every guarantee row holds at step `k`, the
//!   assumptions hold, and the dynamics are followed, the row holds at `k+1`.
//!
//! Each LP maximises the guarantee row minus its right-hand side; satisfaction
//! holds iff every value is non-positive. The hypothesis of the step case is
//! the whole guarantee (all rows jointly), which is what makes single rows
//! inductive when they are not inductive on their own.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contracts::{ContractError, FormatError, LinearContract};
use crate::exec::{self, Execution};
use crate::lp::{LpError, LpProblem, LpSolver, Simplex};
use crate::mat::{self, RowBuilder};
use crate::verdict::{max_or_neg_inf, RowResult, RowStatus};

pub const SYSTEM_SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SatisfactionError {
    #[error(transparent)]
    Invalid(#[from] ContractError),
    #[error("system has {system} {what} but the contract has {contract}")]
    Mismatch { what: &'static str, system: usize, contract: usize },
    #[error("guarantee row {row} out of range (contract has {count} rows)")]
    RowIndex { row: usize, count: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineSystem {
    pub state_dim: usize,
    pub input_dim: usize,
    /// `F`, `n_y × n_y`.
    pub state_matrix: DMatrix<f64>,
    /// `B`, `n_y × n_z`.
    pub input_matrix: DMatrix<f64>,
    /// `f`, length `n_y`.
    pub offset: DVector<f64>,
}

fn check_shape(
    field: &'static str,
    m: &DMatrix<f64>,
    rows: usize,
    cols: usize,
) -> Result<(), ContractError> {
    if m.nrows() != rows {
        return Err(ContractError::Dimension { field, axis: "rows", expected: rows, found: m.nrows() });
    }
    if m.ncols() != cols {
        return Err(ContractError::Dimension {
            field,
            axis: "columns",
            expected: cols,
            found: m.ncols(),
        });
    }
    for i in 0..rows {
        for j in 0..cols {
            if !m[(i, j)].is_finite() {
                return Err(ContractError::NonFinite { field, row: i, col: j });
            }
        }
    }
    Ok(())
}

fn check_vec(field: &'static str, v: &DVector<f64>, len: usize) -> Result<(), ContractError> {
    check_shape(field, &DMatrix::from_column_slice(v.len(), 1, v.as_slice()), len, 1)
}

impl AffineSystem {
    pub fn new(
        state_matrix: DMatrix<f64>,
        input_matrix: DMatrix<f64>,
        offset: DVector<f64>,
    ) -> Result<Self, ContractError> {
        let s = Self {
            state_dim: state_matrix.nrows(),
            input_dim: input_matrix.ncols(),
            state_matrix,
            input_matrix,
            offset,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ContractError> {
        let (ny, nz) = (self.state_dim, self.input_dim);
        check_shape("F", &self.state_matrix, ny, ny)?;
        check_shape("B", &self.input_matrix, ny, nz)?;
        check_vec("f", &self.offset, ny)
    }

    pub fn step(&self, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        &self.state_matrix * y + &self.input_matrix * z + &self.offset
    }
}

/// `{(z(0), y(0)) : P [z(0); y(0)] ≤ q}`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitSet {
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl InitSet {
    pub fn new(matrix: DMatrix<f64>, rhs: DVector<f64>) -> Result<Self, ContractError> {
        check_shape("P", &matrix, rhs.len(), matrix.ncols())?;
        check_vec("q", &rhs, matrix.nrows())?;
        Ok(Self { matrix, rhs })
    }

    pub fn contains(&self, z0: &DVector<f64>, y0: &DVector<f64>, tol: f64) -> bool {
        let x = DVector::from_iterator(z0.len() + y0.len(), z0.iter().chain(y0.iter()).copied());
        (&self.matrix * x - &self.rhs).iter().all(|&v| v <= tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SatFamily {
    Base,
    Step,
}

impl std::fmt::Display for SatFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SatFamily::Base => "base",
            SatFamily::Step => "step",
        })
    }
}

/// Satisfaction LP for one guarantee row, with the objective constant kept
/// apart so that `θ = value + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct SatisfactionLp {
    pub family: SatFamily,
    pub row: usize,
    pub problem: LpProblem,
    pub constant: f64,
    /// Number of `(z, y)` slices in the variable vector, laid out as
    /// `z₀, y₀, z₁, y₁, …`.
    pub slices: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SatisfactionVerdict {
    pub holds: bool,
    pub tolerance: f64,
    pub lp_count: usize,
    #[serde(with = "theta_vec")]
    pub theta_base: Vec<f64>,
    #[serde(with = "theta_vec")]
    pub theta_step: Vec<f64>,
    pub rows: Vec<RowResult<SatFamily>>,
    pub unbounded_rows: Vec<(SatFamily, usize)>,
}

mod theta_vec {
    pub use crate::verdict::ext_real::vec::serialize;
}

impl SatisfactionVerdict {
    pub fn max_base(&self) -> f64 {
        max_or_neg_inf(&self.theta_base)
    }

    pub fn max_step(&self) -> f64 {
        max_or_neg_inf(&self.theta_step)
    }
}

fn check_compatible(
    sys: &AffineSystem,
    c: &LinearContract,
    row: usize,
) -> Result<(), SatisfactionError> {
    sys.validate()?;
    c.validate()?;
    if sys.input_dim != c.input_dim {
        return Err(SatisfactionError::Mismatch {
            what: "inputs",
            system: sys.input_dim,
            contract: c.input_dim,
        });
    }
    if sys.state_dim != c.output_dim {
        return Err(SatisfactionError::Mismatch {
            what: "outputs",
            system: sys.state_dim,
            contract: c.output_dim,
        });
    }
    if row >= c.num_guarantees() {
        return Err(SatisfactionError::RowIndex { row, count: c.num_guarantees() });
    }
    Ok(())
}

/// Offsets of `z_k` and `y_k` in the variable vector.
fn slot(sys: &AffineSystem, k: usize) -> (usize, usize) {
    let w = sys.input_dim + sys.state_dim;
    (k * w, k * w + sys.input_dim)
}

/// Dynamics `y_{k+1} = F y_k + B z_k + f` as paired inequalities.
fn push_dynamics(rows: &mut RowBuilder, sys: &AffineSystem, k: usize) {
    let (z0, y0) = slot(sys, k);
    let (_, y1) = slot(sys, k + 1);
    let eye = DMatrix::identity(sys.state_dim, sys.state_dim);
    let neg_f = -&sys.state_matrix;
    let neg_b = -&sys.input_matrix;
    rows.push_equalities(&[(y1, &eye), (y0, &neg_f), (z0, &neg_b)], &sys.offset);
}

fn push_assumption(rows: &mut RowBuilder, sys: &AffineSystem, c: &LinearContract, k: usize) {
    let (z0, _) = slot(sys, k);
    let (z1, _) = slot(sys, k + 1);
    rows.push_blocks(&[(z1, &c.assume_next), (z0, &c.assume_now)], &c.assume_rhs);
}

/// All guarantee rows on the slice pair `(k, k+1)`, or on slice `k` alone for
/// contracts without a look-ahead part.
fn push_guarantee(rows: &mut RowBuilder, sys: &AffineSystem, c: &LinearContract, k: usize) {
    let (z0, _) = slot(sys, k);
    if mat::is_zero(&c.guar_next) {
        rows.push_blocks(&[(z0, &c.guar_now)], &c.guar_rhs);
    } else {
        let (z1, _) = slot(sys, k + 1);
        rows.push_blocks(&[(z1, &c.guar_next), (z0, &c.guar_now)], &c.guar_rhs);
    }
}

fn guarantee_objective(
    sys: &AffineSystem,
    c: &LinearContract,
    row: usize,
    k: usize,
    cols: usize,
) -> DVector<f64> {
    let (z0, _) = slot(sys, k);
    if mat::is_zero(&c.guar_next) {
        mat::block_row(cols, &[(z0, &c.guar_now)], row)
    } else {
        let (z1, _) = slot(sys, k + 1);
        mat::block_row(cols, &[(z1, &c.guar_next), (z0, &c.guar_now)], row)
    }
}

/// Base case for guarantee row `row`: the row holds at `k = 0`.
pub fn build_theta_base(
    sys: &AffineSystem,
    c: &LinearContract,
    init: &InitSet,
    row: usize,
) -> Result<SatisfactionLp, SatisfactionError> {
    check_compatible(sys, c, row)?;
    let width = sys.input_dim + sys.state_dim;
    if init.matrix.ncols() != width {
        return Err(ContractError::Dimension {
            field: "P",
            axis: "columns",
            expected: width,
            found: init.matrix.ncols(),
        }
        .into());
    }
    let delayed = !mat::is_zero(&c.guar_next);
    let slices = if delayed { 2 } else { 1 };
    let cols = slices * width;
    let mut rows = RowBuilder::new(cols);
    rows.push_blocks(&[(0, &init.matrix)], &init.rhs);
    if delayed {
        push_assumption(&mut rows, sys, c, 0);
        push_dynamics(&mut rows, sys, 0);
    }
    let (a, b) = rows.build();
    let objective = guarantee_objective(sys, c, row, 0, cols);
    Ok(SatisfactionLp {
        family: SatFamily::Base,
        row,
        problem: LpProblem::new(objective, a, b)?,
        constant: -c.guar_rhs[row],
        slices,
    })
}

/// Inductive step for guarantee row `row`.
pub fn build_theta_step(
    sys: &AffineSystem,
    c: &LinearContract,
    row: usize,
) -> Result<SatisfactionLp, SatisfactionError> {
    check_compatible(sys, c, row)?;
    let delayed = !mat::is_zero(&c.guar_next);
    let slices = if delayed { 3 } else { 2 };
    let cols = slices * (sys.input_dim + sys.state_dim);
    let mut rows = RowBuilder::new(cols);
    push_guarantee(&mut rows, sys, c, 0);
    for k in 0..slices - 1 {
        push_assumption(&mut rows, sys, c, k);
        push_dynamics(&mut rows, sys, k);
    }
    let (a, b) = rows.build();
    let objective = guarantee_objective(sys, c, row, 1, cols);
    Ok(SatisfactionLp {
        family: SatFamily::Step,
        row,
        problem: LpProblem::new(objective, a, b)?,
        constant: -c.guar_rhs[row],
        slices,
    })
}

pub fn check_satisfaction(
    sys: &AffineSystem,
    c: &LinearContract,
    init: &InitSet,
    tol: f64,
) -> Result<SatisfactionVerdict, SatisfactionError> {
    check_satisfaction_with(&Simplex::default(), Execution::default(), sys, c, init, tol)
}

pub fn check_satisfaction_with<S: LpSolver>(
    solver: &S,
    exec: Execution,
    sys: &AffineSystem,
    c: &LinearContract,
    init: &InitSet,
    tol: f64,
) -> Result<SatisfactionVerdict, SatisfactionError> {
    let s = c.num_guarantees();
    let mut lps = Vec::with_capacity(2 * s);
    for row in 0..s {
        lps.push(build_theta_base(sys, c, init, row)?);
    }
    for row in 0..s {
        lps.push(build_theta_step(sys, c, row)?);
    }
    let rows: Vec<RowResult<SatFamily>> = exec::try_map_indexed(exec, lps.len(), |i| {
        let lp = &lps[i];
        let outcome = solver.solve(&lp.problem)?;
        Ok::<_, SatisfactionError>(RowResult::from_outcome(lp.family, lp.row, outcome, lp.constant))
    })?;
    let theta = |f: SatFamily| rows.iter().filter(|r| r.family == f).map(|r| r.theta).collect();
    Ok(SatisfactionVerdict {
        holds: rows.iter().all(|r| r.passes(tol)),
        tolerance: tol,
        lp_count: lps.len(),
        theta_base: theta(SatFamily::Base),
        theta_step: theta(SatFamily::Step),
        unbounded_rows: rows
            .iter()
            .filter(|r| r.status == RowStatus::Unbounded)
            .map(|r| (r.family, r.row))
            .collect(),
        rows,
    })
}

/// On-disk closed-loop system, optionally carrying its initial set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub schema_version: String,
    #[serde(default)]
    pub label: String,
    pub n_y: usize,
    pub n_z: usize,
    #[serde(rename = "F")]
    pub f_matrix: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b_matrix: Vec<Vec<f64>>,
    #[serde(rename = "f")]
    pub offset: Vec<f64>,
}

/// On-disk initial set over `[z(0); y(0)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitFile {
    pub schema_version: String,
    pub n_z: usize,
    pub n_y: usize,
    #[serde(rename = "P")]
    pub matrix: Vec<Vec<f64>>,
    #[serde(rename = "q")]
    pub rhs: Vec<f64>,
}

fn rows_of(field: &str, rows: &[Vec<f64>], cols: usize) -> Result<DMatrix<f64>, FormatError> {
    mat::from_rows(rows, cols).map_err(|(row, found)| FormatError::RowLength {
        field: field.to_string(),
        row,
        found,
        expected: cols,
    })
}

fn check_version(found: &str) -> Result<(), FormatError> {
    if found != SYSTEM_SCHEMA_VERSION {
        return Err(FormatError::SchemaVersion {
            found: found.to_string(),
            expected: SYSTEM_SCHEMA_VERSION,
        });
    }
    Ok(())
}

impl AffineSystem {
    pub fn to_file(&self, label: &str) -> SystemFile {
        SystemFile {
            schema_version: SYSTEM_SCHEMA_VERSION.to_string(),
            label: label.to_string(),
            n_y: self.state_dim,
            n_z: self.input_dim,
            f_matrix: mat::to_rows(&self.state_matrix),
            b_matrix: mat::to_rows(&self.input_matrix),
            offset: self.offset.iter().copied().collect(),
        }
    }

    pub fn from_file(file: &SystemFile) -> Result<Self, FormatError> {
        check_version(&file.schema_version)?;
        let s = Self {
            state_dim: file.n_y,
            input_dim: file.n_z,
            state_matrix: rows_of("F", &file.f_matrix, file.n_y)?,
            input_matrix: rows_of("B", &file.b_matrix, file.n_z)?,
            offset: mat::vector(&file.offset),
        };
        s.validate()?;
        Ok(s)
    }
}

impl InitSet {
    pub fn to_file(&self, n_z: usize) -> InitFile {
        InitFile {
            schema_version: SYSTEM_SCHEMA_VERSION.to_string(),
            n_z,
            n_y: self.matrix.ncols() - n_z,
            matrix: mat::to_rows(&self.matrix),
            rhs: self.rhs.iter().copied().collect(),
        }
    }

    pub fn from_file(file: &InitFile) -> Result<Self, FormatError> {
        check_version(&file.schema_version)?;
        let m = rows_of("P", &file.matrix, file.n_z + file.n_y)?;
        Ok(Self::new(m, mat::vector(&file.rhs))?)
    }
}

fn read(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: String) -> Result<(), FormatError> {
    fs::write(path, text + "\n").map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

pub fn load_system(path: impl AsRef<Path>) -> Result<AffineSystem, FormatError> {
    let file: SystemFile = serde_json::from_str(&read(path.as_ref())?)?;
    AffineSystem::from_file(&file)
}

pub fn save_system(sys: &AffineSystem, label: &str, path: impl AsRef<Path>) -> Result<(), FormatError> {
    write(path.as_ref(), serde_json::to_string_pretty(&sys.to_file(label)).expect("serialises"))
}

pub fn load_init(path: impl AsRef<Path>) -> Result<InitSet, FormatError> {
    let file: InitFile = serde_json::from_str(&read(path.as_ref())?)?;
    InitSet::from_file(&file)
}

pub fn save_init(init: &InitSet, n_z: usize, path: impl AsRef<Path>) -> Result<(), FormatError> {
    write(path.as_ref(), serde_json::to_string_pretty(&init.to_file(n_z)).expect("serialises"))
}
