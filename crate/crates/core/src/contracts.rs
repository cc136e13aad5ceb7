//! Linear assume/guarantee contracts.
//!
//! A contract with input `d ∈ ℝ^{n_d}` and output `y ∈ ℝ^{n_y}` assumes
//!
//! ```text
//! A¹ d(k+1) + A⁰ d(k) ≤ a⁰                      for all k
//! ```
//!
//! and guarantees
//!
//! ```text
//! G¹ [d(k+1); y(k+1)] + G⁰ [d(k); y(k)] ≤ g⁰   for all k.
//! ```
//!
//! Zero assumption rows mean "assume nothing", zero guarantee rows mean
//! "guarantee nothing". Cascades are kept symbolic as a [`CascadeTriple`]; the
//! composed assumption and guarantee sets are never materialised.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mat;

pub const CONTRACT_SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContractError {
    #[error("{field}: expected {expected} {axis}, found {found}")]
    Dimension { field: &'static str, axis: &'static str, expected: usize, found: usize },
    #[error("{field}: non-finite entry at row {row}, column {col}")]
    NonFinite { field: &'static str, row: usize, col: usize },
    #[error("cascade mismatch: {0}")]
    Cascade(String),
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("cannot read or write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported schema_version {found:?} (expected {expected:?})")]
    SchemaVersion { found: String, expected: &'static str },
    #[error("{field}: row {row} has {found} entries, expected {expected}")]
    RowLength { field: String, row: usize, found: usize, expected: usize },
    #[error(transparent)]
    Invalid(#[from] ContractError),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearContract {
    pub label: String,
    pub input_dim: usize,
    pub output_dim: usize,
    /// `A¹`, `s_A × n_d`.
    pub assume_next: DMatrix<f64>,
    /// `A⁰`, `s_A × n_d`.
    pub assume_now: DMatrix<f64>,
    /// `a⁰`, length `s_A`.
    pub assume_rhs: DVector<f64>,
    /// `G¹`, `s_G × (n_d + n_y)`.
    pub guar_next: DMatrix<f64>,
    /// `G⁰`, `s_G × (n_d + n_y)`.
    pub guar_now: DMatrix<f64>,
    /// `g⁰`, length `s_G`.
    pub guar_rhs: DVector<f64>,
}

/// Column split of the guarantee matrices at `n_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct GuaranteeBlocks {
    pub next_input: DMatrix<f64>,
    pub now_input: DMatrix<f64>,
    pub next_output: DMatrix<f64>,
    pub now_output: DMatrix<f64>,
}

impl GuaranteeBlocks {
    /// Re-concatenates into `(G¹, G⁰)`.
    pub fn concat(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let join = |a: &DMatrix<f64>, b: &DMatrix<f64>| {
            DMatrix::from_fn(a.nrows(), a.ncols() + b.ncols(), |i, j| {
                if j < a.ncols() { a[(i, j)] } else { b[(i, j - a.ncols())] }
            })
        };
        (join(&self.next_input, &self.next_output), join(&self.now_input, &self.now_output))
    }
}

impl LinearContract {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        label: impl Into<String>,
        input_dim: usize,
        output_dim: usize,
        assume_next: DMatrix<f64>,
        assume_now: DMatrix<f64>,
        assume_rhs: DVector<f64>,
        guar_next: DMatrix<f64>,
        guar_now: DMatrix<f64>,
        guar_rhs: DVector<f64>,
    ) -> Result<Self, ContractError> {
        let c = Self {
            label: label.into(),
            input_dim,
            output_dim,
            assume_next,
            assume_now,
            assume_rhs,
            guar_next,
            guar_now,
            guar_rhs,
        };
        c.validate()?;
        Ok(c)
    }

    /// Assumes nothing and guarantees nothing.
    pub fn vacuous(label: impl Into<String>, input_dim: usize, output_dim: usize) -> Self {
        let w = input_dim + output_dim;
        Self {
            label: label.into(),
            input_dim,
            output_dim,
            assume_next: DMatrix::zeros(0, input_dim),
            assume_now: DMatrix::zeros(0, input_dim),
            assume_rhs: DVector::zeros(0),
            guar_next: DMatrix::zeros(0, w),
            guar_now: DMatrix::zeros(0, w),
            guar_rhs: DVector::zeros(0),
        }
    }

    pub fn num_assumptions(&self) -> usize {
        self.assume_next.nrows()
    }

    pub fn num_guarantees(&self) -> usize {
        self.guar_next.nrows()
    }

    pub fn validate(&self) -> Result<(), ContractError> {
        let s_a = self.assume_next.nrows();
        let s_g = self.guar_next.nrows();
        let w = self.input_dim + self.output_dim;
        let dims: [(&'static str, &'static str, usize, usize); 8] = [
            ("assume_next", "columns", self.input_dim, self.assume_next.ncols()),
            ("assume_now", "rows", s_a, self.assume_now.nrows()),
            ("assume_now", "columns", self.input_dim, self.assume_now.ncols()),
            ("assume_rhs", "entries", s_a, self.assume_rhs.len()),
            ("guar_next", "columns", w, self.guar_next.ncols()),
            ("guar_now", "rows", s_g, self.guar_now.nrows()),
            ("guar_now", "columns", w, self.guar_now.ncols()),
            ("guar_rhs", "entries", s_g, self.guar_rhs.len()),
        ];
        for (field, axis, expected, found) in dims {
            if expected != found {
                return Err(ContractError::Dimension { field, axis, expected, found });
            }
        }
        let mats: [(&'static str, &DMatrix<f64>); 4] = [
            ("assume_next", &self.assume_next),
            ("assume_now", &self.assume_now),
            ("guar_next", &self.guar_next),
            ("guar_now", &self.guar_now),
        ];
        for (field, m) in mats {
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    if !m[(i, j)].is_finite() {
                        return Err(ContractError::NonFinite { field, row: i, col: j });
                    }
                }
            }
        }
        for (field, v) in [("assume_rhs", &self.assume_rhs), ("guar_rhs", &self.guar_rhs)] {
            if let Some(row) = v.iter().position(|x| !x.is_finite()) {
                return Err(ContractError::NonFinite { field, row, col: 0 });
            }
        }
        Ok(())
    }

    pub fn split_guarantees(&self) -> GuaranteeBlocks {
        let (s, nd, ny) = (self.guar_next.nrows(), self.input_dim, self.output_dim);
        GuaranteeBlocks {
            next_input: self.guar_next.view((0, 0), (s, nd)).into_owned(),
            now_input: self.guar_now.view((0, 0), (s, nd)).into_owned(),
            next_output: self.guar_next.view((0, nd), (s, ny)).into_owned(),
            now_output: self.guar_now.view((0, nd), (s, ny)).into_owned(),
        }
    }

    /// True iff the guarantees never constrain the current output sample,
    /// i.e. the output block of `G⁰` is exactly zero (a delayed guarantee).
    pub fn output_now_is_zero(&self) -> bool {
        mat::is_zero(&self.split_guarantees().now_output)
    }

    pub fn to_file(&self) -> ContractFile {
        ContractFile {
            schema_version: CONTRACT_SCHEMA_VERSION.to_string(),
            label: self.label.clone(),
            n_d: self.input_dim,
            n_y: self.output_dim,
            assume: AssumeSection {
                a1: mat::to_rows(&self.assume_next),
                a0: mat::to_rows(&self.assume_now),
                rhs: self.assume_rhs.iter().copied().collect(),
            },
            guarantee: GuaranteeSection {
                g1: mat::to_rows(&self.guar_next),
                g0: mat::to_rows(&self.guar_now),
                rhs: self.guar_rhs.iter().copied().collect(),
            },
        }
    }

    pub fn from_file(file: &ContractFile) -> Result<Self, FormatError> {
        if file.schema_version != CONTRACT_SCHEMA_VERSION {
            return Err(FormatError::SchemaVersion {
                found: file.schema_version.clone(),
                expected: CONTRACT_SCHEMA_VERSION,
            });
        }
        let w = file.n_d + file.n_y;
        let m = |field: &str, rows: &[Vec<f64>], cols: usize| {
            mat::from_rows(rows, cols).map_err(|(row, found)| FormatError::RowLength {
                field: field.to_string(),
                row,
                found,
                expected: cols,
            })
        };
        let c = Self {
            label: file.label.clone(),
            input_dim: file.n_d,
            output_dim: file.n_y,
            assume_next: m("assume.A1", &file.assume.a1, file.n_d)?,
            assume_now: m("assume.A0", &file.assume.a0, file.n_d)?,
            assume_rhs: mat::vector(&file.assume.rhs),
            guar_next: m("guarantee.G1", &file.guarantee.g1, w)?,
            guar_now: m("guarantee.G0", &file.guarantee.g0, w)?,
            guar_rhs: mat::vector(&file.guarantee.rhs),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("contract serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        let file: ContractFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }
}

/// On-disk contract document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractFile {
    pub schema_version: String,
    #[serde(default)]
    pub label: String,
    pub n_d: usize,
    pub n_y: usize,
    pub assume: AssumeSection,
    pub guarantee: GuaranteeSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssumeSection {
    #[serde(rename = "A1")]
    pub a1: Vec<Vec<f64>>,
    #[serde(rename = "A0")]
    pub a0: Vec<Vec<f64>>,
    #[serde(rename = "a0")]
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuaranteeSection {
    #[serde(rename = "G1")]
    pub g1: Vec<Vec<f64>>,
    #[serde(rename = "G0")]
    pub g0: Vec<Vec<f64>>,
    #[serde(rename = "g0")]
    pub rhs: Vec<f64>,
}

pub fn load_contract(path: impl AsRef<Path>) -> Result<LinearContract, FormatError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| FormatError::Io { path: path.to_path_buf(), source })?;
    LinearContract::from_json(&text)
}

pub fn save_contract(c: &LinearContract, path: impl AsRef<Path>) -> Result<(), FormatError> {
    let path = path.as_ref();
    fs::write(path, c.to_json() + "\n")
        .map_err(|source| FormatError::Io { path: path.to_path_buf(), source })
}

/// `c1: d → z`, `c2: z → y`, and the composite `c: d → y`.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeTriple {
    pub upstream: LinearContract,
    pub downstream: LinearContract,
    pub composite: LinearContract,
}

impl CascadeTriple {
    pub fn new(
        upstream: LinearContract,
        downstream: LinearContract,
        composite: LinearContract,
    ) -> Result<Self, ContractError> {
        upstream.validate()?;
        downstream.validate()?;
        composite.validate()?;
        if upstream.output_dim != downstream.input_dim {
            return Err(ContractError::Cascade(format!(
                "upstream output dimension {} differs from downstream input dimension {}",
                upstream.output_dim, downstream.input_dim
            )));
        }
        if upstream.input_dim != composite.input_dim {
            return Err(ContractError::Cascade(format!(
                "upstream input dimension {} differs from composite input dimension {}",
                upstream.input_dim, composite.input_dim
            )));
        }
        if downstream.output_dim != composite.output_dim {
            return Err(ContractError::Cascade(format!(
                "downstream output dimension {} differs from composite output dimension {}",
                downstream.output_dim, composite.output_dim
            )));
        }
        Ok(Self { upstream, downstream, composite })
    }

    pub fn input_dim(&self) -> usize {
        self.upstream.input_dim
    }

    pub fn intermediate_dim(&self) -> usize {
        self.upstream.output_dim
    }

    pub fn output_dim(&self) -> usize {
        self.downstream.output_dim
    }
}
