//! The extendability triple document; the other formats live in the core
//! crate.

use std::fs;
use std::path::Path;

use linag_core::contracts::FormatError;
use linag_core::mat;
use linag_core::refinement::ExtendableTriple;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub const EXTEND_SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendFile {
    pub schema_version: String,
    #[serde(default)]
    pub label: String,
    /// Dimension of one sample `u(k)`.
    pub n: usize,
    #[serde(rename = "V1")]
    pub v1: Vec<Vec<f64>>,
    #[serde(rename = "V0")]
    pub v0: Vec<Vec<f64>>,
    #[serde(rename = "v0")]
    pub rhs: Vec<f64>,
}

/// `(label, V¹, V⁰, v⁰)`.
pub type Triple = (String, DMatrix<f64>, DMatrix<f64>, DVector<f64>);

impl ExtendFile {
    pub fn from_triple(t: &ExtendableTriple) -> Self {
        Self {
            schema_version: EXTEND_SCHEMA_VERSION.into(),
            label: t.name.to_string(),
            n: t.v1.ncols(),
            v1: mat::to_rows(&t.v1),
            v0: mat::to_rows(&t.v0),
            rhs: t.rhs.iter().copied().collect(),
        }
    }

    pub fn into_triple(self) -> Result<Triple, FormatError> {
        if self.schema_version != EXTEND_SCHEMA_VERSION {
            return Err(FormatError::SchemaVersion {
                found: self.schema_version,
                expected: EXTEND_SCHEMA_VERSION,
            });
        }
        let m = |field: &str, rows: &[Vec<f64>]| {
            mat::from_rows(rows, self.n).map_err(|(row, found)| FormatError::RowLength {
                field: field.to_string(),
                row,
                found,
                expected: self.n,
            })
        };
        let (v1, v0) = (m("V1", &self.v1)?, m("V0", &self.v0)?);
        Ok((self.label, v1, v0, mat::vector(&self.rhs)))
    }
}

pub fn load_extend(path: &Path) -> Result<Triple, FormatError> {
    let text = fs::read_to_string(path)
        .map_err(|source| FormatError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str::<ExtendFile>(&text)?.into_triple()
}
