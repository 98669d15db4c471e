//! LIBSVM text format.
//!
//! Each nonempty line is `label idx:val idx:val ...` with 1-based, strictly
//! increasing indices. `#` starts a comment that runs to the end of the line,
//! and both LF and CRLF line endings are accepted. Files used only for
//! prediction may omit the label on every line.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{Dataset, SparseMatrix};
use crate::error::{Error, Result};

/// A parsed file before label normalization.
#[derive(Debug, Clone)]
pub struct LibsvmRecords {
    pub features: SparseMatrix,
    /// Raw label values, or `None` when no line carries a label.
    pub raw_labels: Option<Vec<f64>>,
}

/// Parses LIBSVM records without interpreting the labels.
///
/// The column count is the largest index seen unless `n_cols` overrides it.
pub fn parse_records<R: Read>(reader: R, n_cols: Option<usize>) -> Result<LibsvmRecords> {
    let reader = BufReader::new(reader);
    let mut row_offsets = vec![0usize];
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut labelled: Option<bool> = None;
    let mut max_index = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        let content = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        };
        let mut tokens = content.split_whitespace().peekable();
        let Some(&first) = tokens.peek() else {
            continue;
        };
        let has_label = !first.contains(':');
        match labelled {
            None => labelled = Some(has_label),
            Some(prev) if prev != has_label => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "some lines carry a label and others do not".into(),
                });
            }
            _ => {}
        }
        if has_label {
            let tok = tokens.next().unwrap();
            let label: f64 = tok.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid label `{tok}`"),
            })?;
            if !label.is_finite() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("invalid label `{tok}`"),
                });
            }
            labels.push(label);
        }

        let mut prev: Option<usize> = None;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: lineno,
                msg: format!("expected `index:value`, found `{tok}`"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid feature index `{idx}`"),
            })?;
            if idx < 1 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "feature indices are 1-based; found 0".into(),
                });
            }
            if let Some(p) = prev {
                if idx <= p {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("feature indices must increase strictly ({p} then {idx})"),
                    });
                }
            }
            let val: f64 = val.parse().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid feature value `{val}`"),
            })?;
            if !val.is_finite() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("non-finite feature value `{val}`"),
                });
            }
            prev = Some(idx);
            max_index = max_index.max(idx);
            col_indices.push(idx - 1);
            values.push(val);
        }
        row_offsets.push(values.len());
    }

    let n_rows = row_offsets.len() - 1;
    let n_cols = match n_cols {
        Some(n) if n < max_index => {
            return Err(Error::Dimension(format!(
                "feature index {max_index} exceeds the requested column count {n}"
            )));
        }
        Some(n) => n,
        None => max_index,
    };
    let features = SparseMatrix::new(n_rows, n_cols, row_offsets, col_indices, values)?;
    let raw_labels = match labelled {
        Some(true) => Some(labels),
        _ => None,
    };
    Ok(LibsvmRecords {
        features,
        raw_labels,
    })
}

/// Maps raw labels onto {-1, +1}.
///
/// Labels already in {-1, +1} are kept. Otherwise exactly two distinct values
/// are required and the smaller one becomes -1.
pub fn map_labels(raw: &[f64]) -> Result<Vec<f64>> {
    let mut distinct: Vec<f64> = Vec::new();
    for &l in raw {
        if !distinct.contains(&l) {
            distinct.push(l);
            if distinct.len() > 2 {
                break;
            }
        }
    }
    if distinct.len() > 2 {
        let mut all: Vec<f64> = raw.to_vec();
        all.sort_by(f64::total_cmp);
        all.dedup();
        let sample = all
            .iter()
            .take(5)
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        return Err(Error::TooManyLabels {
            count: all.len(),
            sample,
        });
    }
    if distinct.iter().all(|&l| l == 1.0 || l == -1.0) {
        return Ok(raw.to_vec());
    }
    if distinct.len() < 2 {
        return Err(Error::Labels(format!(
            "a single label value {} cannot be mapped onto {{-1, +1}}",
            distinct[0]
        )));
    }
    let low = distinct[0].min(distinct[1]);
    Ok(raw
        .iter()
        .map(|&l| if l == low { -1.0 } else { 1.0 })
        .collect())
}

/// Parses a labelled LIBSVM stream into a [`Dataset`].
pub fn parse_libsvm<R: Read>(reader: R, n_cols: Option<usize>) -> Result<Dataset> {
    let records = parse_records(reader, n_cols)?;
    let Some(raw) = records.raw_labels else {
        if records.features.n_rows() == 0 {
            return Err(Error::Labels("the input contains no samples".into()));
        }
        return Err(Error::Labels("the input carries no labels".into()));
    };
    let labels = map_labels(&raw)?;
    Dataset::new(records.features, labels)
}

pub fn read_libsvm_file<P: AsRef<Path>>(path: P, n_cols: Option<usize>) -> Result<Dataset> {
    parse_libsvm(File::open(path)?, n_cols)
}

/// Writes a dataset in LIBSVM format. Values use the shortest representation
/// that parses back to the same `f64`.
pub fn write_libsvm<W: Write>(ds: &Dataset, mut out: W) -> Result<()> {
    for (row, &label) in ds.features().rows().zip(ds.labels()) {
        write!(out, "{}", if label > 0.0 { "+1" } else { "-1" })?;
        for (j, v) in row.iter() {
            write!(out, " {}:{}", j + 1, v)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads a file that may hold labelled or unlabelled records.
pub fn read_records_file<P: AsRef<Path>>(path: P, n_cols: Option<usize>) -> Result<LibsvmRecords> {
    let file = File::open(path)?;
    parse_records(file, n_cols)
}
