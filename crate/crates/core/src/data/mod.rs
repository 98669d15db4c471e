//! Datasets: sparse features plus ±1 labels, LIBSVM I/O, and stratified splits.

mod libsvm;
mod sparse;
mod split;

pub use libsvm::{
    map_labels, parse_libsvm, parse_records, read_libsvm_file, read_records_file, write_libsvm,
    LibsvmRecords,
};
pub use sparse::{SparseMatrix, SparseRow};
pub use split::{stratified_split, SplitSpec};

use crate::error::{Error, Result};

/// Feature matrix `X` (n×d) with labels `y ∈ {-1, +1}ⁿ`.
///
/// Both classes are always present. `Y = diag(y)` and `H = Y X` are never
/// materialized; see [`crate::wsolve::HOperator`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: SparseMatrix,
    labels: Vec<f64>,
}

impl Dataset {
    pub fn new(features: SparseMatrix, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != features.n_rows() {
            return Err(Error::Dimension(format!(
                "{} labels for {} feature rows",
                labels.len(),
                features.n_rows()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l != 1.0 && l != -1.0) {
            return Err(Error::Labels(format!("label {bad} is not -1 or +1")));
        }
        let positives = labels.iter().filter(|&&l| l > 0.0).count();
        if positives == 0 || positives == labels.len() {
            return Err(Error::Labels(
                "both classes (-1 and +1) must be present".into(),
            ));
        }
        Ok(Self { features, labels })
    }

    pub fn features(&self) -> &SparseMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Number of samples `n`.
    pub fn n_samples(&self) -> usize {
        self.features.n_rows()
    }

    /// Number of features `d`.
    pub fn n_features(&self) -> usize {
        self.features.n_cols()
    }

    /// `(negatives, positives)`
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l > 0.0).count();
        (self.labels.len() - pos, pos)
    }

    /// Same samples with a wider column space.
    pub fn with_n_features(self, n_cols: usize) -> Result<Self> {
        Ok(Self {
            features: self.features.with_n_cols(n_cols)?,
            labels: self.labels,
        })
    }

    fn subset(&self, rows: &[usize]) -> Result<Self> {
        let labels = rows.iter().map(|&r| self.labels[r]).collect();
        Self::new(self.features.select_rows(rows), labels)
    }
}

/// Stored entries as a percentage of `n·d`.
pub fn sparsity(ds: &Dataset) -> f64 {
    let cells = ds.n_samples() as f64 * ds.n_features() as f64;
    if cells == 0.0 {
        return 0.0;
    }
    100.0 * ds.features().nnz() as f64 / cells
}
