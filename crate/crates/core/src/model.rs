//! Trained linear classifiers.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, SparseMatrix, SparseRow};
use crate::error::{Error, Result};
use crate::penalty::PenaltyConfig;

/// Coefficients with magnitude below this count as zero by default.
pub const DEFAULT_ZERO_TOLERANCE: f64 = 1e-6;

/// Decision function `sign(wᵀx + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub struct LinearModel {
    pub w: Vec<f64>,
    pub b: f64,
    pub penalty_used: PenaltyConfig,
    pub zero_tolerance: f64,
}

/// Output of [`LinearModel::coefficient_sparsity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientSparsity {
    pub zero_count: usize,
    pub total: usize,
    pub fraction: f64,
}

impl LinearModel {
    pub fn new(w: Vec<f64>, b: f64, penalty_used: PenaltyConfig) -> Result<Self> {
        if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "model coefficients must be finite".into(),
            ));
        }
        Ok(Self {
            w,
            b,
            penalty_used,
            zero_tolerance: DEFAULT_ZERO_TOLERANCE,
        })
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn decision_value(&self, x: SparseRow<'_>) -> Result<f64> {
        if let Some(&j) = x.indices.last() {
            if j >= self.w.len() {
                return Err(Error::Dimension(format!(
                    "feature {} is outside the model dimension {}",
                    j + 1,
                    self.w.len()
                )));
            }
        }
        Ok(x.dot(&self.w) + self.b)
    }

    /// `+1` or `-1`; a zero decision value maps to `+1`.
    pub fn predict(&self, x: SparseRow<'_>) -> Result<f64> {
        Ok(if self.decision_value(x)? >= 0.0 {
            1.0
        } else {
            -1.0
        })
    }

    pub fn predict_all(&self, x: &SparseMatrix) -> Result<Vec<f64>> {
        if x.n_cols() > self.dim() {
            return Err(Error::Dimension(format!(
                "data has {} features but the model has {}",
                x.n_cols(),
                self.dim()
            )));
        }
        x.rows().map(|r| self.predict(r)).collect()
    }

    /// Fraction of samples whose prediction equals the label.
    pub fn accuracy(&self, ds: &Dataset) -> Result<f64> {
        accuracy_of(&self.predict_all(ds.features())?, ds.labels())
    }

    pub fn coefficient_sparsity(&self) -> CoefficientSparsity {
        let zero_count = self
            .w
            .iter()
            .filter(|v| v.abs() < self.zero_tolerance)
            .count();
        let total = self.w.len();
        let fraction = if total == 0 {
            0.0
        } else {
            zero_count as f64 / total as f64
        };
        CoefficientSparsity {
            zero_count,
            total,
            fraction,
        }
    }

    /// The model with `(w, b)` replaced by `(−w, −b)`.
    pub fn negated(&self) -> Self {
        Self {
            w: self.w.iter().map(|v| -v).collect(),
            b: -self.b,
            ..self.clone()
        }
    }

    pub fn to_file_format(&self) -> ModelFile {
        ModelFile {
            dim: self.dim(),
            bias: self.b,
            weights: self
                .w
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(j, &v)| (j, v))
                .collect(),
            penalty: self.penalty_used,
        }
    }

    pub fn from_file_format(file: ModelFile) -> Result<Self> {
        let mut w = vec![0.0; file.dim];
        for (j, v) in file.weights {
            if j >= file.dim {
                return Err(Error::Dimension(format!(
                    "weight index {j} outside model dimension {}",
                    file.dim
                )));
            }
            w[j] = v;
        }
        Self::new(w, file.bias, file.penalty)
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        Ok(serde_json::from_reader(input)?)
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_json(&mut out)?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::read_json(BufReader::new(File::open(path)?))
    }
}

pub(crate) fn accuracy_of(predictions: &[f64], labels: &[f64]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Ok(0.0);
    }
    let hits = predictions
        .iter()
        .zip(labels)
        .filter(|(p, l)| p == l)
        .count();
    Ok(hits as f64 / labels.len() as f64)
}

impl TryFrom<ModelFile> for LinearModel {
    type Error = Error;

    fn try_from(file: ModelFile) -> Result<Self> {
        Self::from_file_format(file)
    }
}

impl From<LinearModel> for ModelFile {
    fn from(m: LinearModel) -> Self {
        m.to_file_format()
    }
}

/// On-disk model: sparse `(index, value)` weight pairs plus the penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub dim: usize,
    pub bias: f64,
    pub weights: Vec<(usize, f64)>,
    pub penalty: PenaltyConfig,
}
