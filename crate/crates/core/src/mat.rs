//! Small helpers for building dense matrices from rows and for the row-major
//! JSON encoding used by every file format in this crate.

use nalgebra::{DMatrix, DVector};

pub fn from_rows(rows: &[Vec<f64>], cols: usize) -> Result<DMatrix<f64>, (usize, usize)> {
    for (i, r) in rows.iter().enumerate() {
        if r.len() != cols {
            return Err((i, r.len()));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn row_matrix(rows: &[&[f64]]) -> DMatrix<f64> {
    let cols = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
}

pub fn vector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

pub fn is_zero(m: &DMatrix<f64>) -> bool {
    m.iter().all(|&v| v == 0.0)
}

/// Accumulates inequality rows `A x ≤ b` over a fixed variable count, where
/// each row is written block-wise at given column offsets.
#[derive(Debug, Clone)]
pub struct RowBuilder {
    cols: usize,
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl RowBuilder {
    pub fn new(cols: usize) -> Self {
        Self { cols, rows: Vec::new(), rhs: Vec::new() }
    }

    /// Appends `Σ blocks[k].1 · x[blocks[k].0 ..] ≤ rhs`, one row per matrix row.
    pub fn push_blocks(&mut self, blocks: &[(usize, &DMatrix<f64>)], rhs: &DVector<f64>) {
        for i in 0..rhs.len() {
            let mut row = vec![0.0; self.cols];
            for &(offset, m) in blocks {
                debug_assert_eq!(m.nrows(), rhs.len());
                for j in 0..m.ncols() {
                    row[offset + j] += m[(i, j)];
                }
            }
            self.rows.push(row);
            self.rhs.push(rhs[i]);
        }
    }

    /// Appends `lhs = rhs` as the pair `lhs ≤ rhs`, `−lhs ≤ −rhs`.
    pub fn push_equalities(&mut self, blocks: &[(usize, &DMatrix<f64>)], rhs: &DVector<f64>) {
        self.push_blocks(blocks, rhs);
        let negated: Vec<(usize, DMatrix<f64>)> = blocks.iter().map(|&(o, m)| (o, -m)).collect();
        let refs: Vec<(usize, &DMatrix<f64>)> = negated.iter().map(|(o, m)| (*o, m)).collect();
        self.push_blocks(&refs, &(-rhs));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn build(self) -> (DMatrix<f64>, DVector<f64>) {
        let m = DMatrix::from_fn(self.rows.len(), self.cols, |i, j| self.rows[i][j]);
        (m, DVector::from_vec(self.rhs))
    }
}

/// Dense row vector of length `cols` with blocks of `row` of each matrix placed at offsets.
pub fn block_row(cols: usize, blocks: &[(usize, &DMatrix<f64>)], row: usize) -> DVector<f64> {
    let mut out = DVector::zeros(cols);
    for &(offset, m) in blocks {
        for j in 0..m.ncols() {
            out[offset + j] += m[(row, j)];
        }
    }
    out
}
