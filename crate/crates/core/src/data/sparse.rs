use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Compressed-sparse-row matrix of `f64` values.
///
/// Column indices are 0-based and strictly increasing within each row.
/// Explicitly stored zeros are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Borrowed view of one CSR row.
#[derive(Debug, Clone, Copy)]
pub struct SparseRow<'a> {
    pub indices: &'a [usize],
    pub values: &'a [f64],
}

impl<'a> SparseRow<'a> {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Dot product with a dense vector. Indices must be in range.
    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(self.values)
            .map(|(&j, &v)| v * x[j])
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + 'a {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }
}

impl SparseMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 {
            return Err(Error::InvalidMatrix(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                n_rows + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::InvalidMatrix("row_offsets[0] must be 0".into()));
        }
        if col_indices.len() != values.len() || row_offsets[n_rows] != values.len() {
            return Err(Error::InvalidMatrix(format!(
                "row_offsets ends at {}, but there are {} indices and {} values",
                row_offsets[n_rows],
                col_indices.len(),
                values.len()
            )));
        }
        for r in 0..n_rows {
            let (lo, hi) = (row_offsets[r], row_offsets[r + 1]);
            if lo > hi {
                return Err(Error::InvalidMatrix(format!(
                    "row_offsets decreases at row {r}"
                )));
            }
            let cols = &col_indices[lo..hi];
            if let Some(&last) = cols.last() {
                if last >= n_cols {
                    return Err(Error::InvalidMatrix(format!(
                        "row {r} has column {last} but the matrix has {n_cols} columns"
                    )));
                }
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidMatrix(format!(
                    "column indices of row {r} are not strictly increasing"
                )));
            }
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a CSR matrix from dense row-major data, dropping exact zeros.
    pub fn from_dense_rows(rows: &[Vec<f64>], n_cols: usize) -> Result<Self> {
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::Dimension(format!(
                    "row {r} has {} entries, expected {n_cols}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        Self::new(rows.len(), n_cols, row_offsets, col_indices, values)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Number of stored entries (explicit zeros included).
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row(&self, r: usize) -> SparseRow<'_> {
        let (lo, hi) = (self.row_offsets[r], self.row_offsets[r + 1]);
        SparseRow {
            indices: &self.col_indices[lo..hi],
            values: &self.values[lo..hi],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = SparseRow<'_>> {
        (0..self.n_rows).map(move |r| self.row(r))
    }

    /// Widens the column space. Fails if `n_cols` would drop a stored column.
    pub fn with_n_cols(mut self, n_cols: usize) -> Result<Self> {
        let max_col = self.col_indices.iter().copied().max();
        if let Some(m) = max_col {
            if m >= n_cols {
                return Err(Error::Dimension(format!(
                    "column {} is stored but only {n_cols} columns were requested",
                    m + 1
                )));
            }
        }
        self.n_cols = n_cols;
        Ok(self)
    }

    /// `out = X x`
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(out.len(), self.n_rows);
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.row(r).dot(x);
        }
    }

    /// `out = Xᵀ r`
    pub fn tr_mul_vec(&self, r: &[f64], out: &mut [f64]) {
        debug_assert_eq!(r.len(), self.n_rows);
        debug_assert_eq!(out.len(), self.n_cols);
        out.fill(0.0);
        for (i, &ri) in r.iter().enumerate() {
            if ri == 0.0 {
                continue;
            }
            for (j, v) in self.row(i).iter() {
                out[j] += v * ri;
            }
        }
    }

    /// New matrix made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for &r in rows {
            let row = self.row(r);
            col_indices.extend_from_slice(row.indices);
            values.extend_from_slice(row.values);
            row_offsets.push(values.len());
        }
        Self {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for r in 0..self.n_rows {
            for (j, v) in self.row(r).iter() {
                m[(r, j)] = v;
            }
        }
        m
    }
}
