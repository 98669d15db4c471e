//! `(ρ₁, ρ₂)` grid search with held-out accuracy.

use std::io::Write;

use serde::Serialize;

use crate::admm::{fit, SolverConfig, Termination};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Values tried for each of `ρ₁` and `ρ₂`.
pub const RHO_GRID: [f64; 6] = [0.01, 0.1, 1.0, 1.5, 5.0, 10.0];

/// All 36 pairs of [`RHO_GRID`], `ρ₁` outermost.
pub fn full_grid() -> Vec<(f64, f64)> {
    RHO_GRID
        .iter()
        .flat_map(|&a| RHO_GRID.iter().map(move |&b| (a, b)))
        .collect()
}

/// Parses `"r1:r2,r1:r2,..."`.
pub fn parse_grid(text: &str) -> Result<Vec<(f64, f64)>> {
    let bad = |p: &str| Error::InvalidConfig(format!("bad grid entry `{p}`, expected rho1:rho2"));
    let pairs = text
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (a, b) = p.split_once(':').ok_or_else(|| bad(p))?;
            let a: f64 = a.trim().parse().map_err(|_| bad(p))?;
            let b: f64 = b.trim().parse().map_err(|_| bad(p))?;
            Ok((a, b))
        })
        .collect::<Result<Vec<_>>>()?;
    if pairs.is_empty() {
        return Err(Error::InvalidConfig("empty rho grid".into()));
    }
    Ok(pairs)
}

/// One grid cell. Failed fits keep their error instead of aborting the search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub rho1: f64,
    pub rho2: f64,
    pub accuracy: Option<f64>,
    pub iterations: Option<usize>,
    pub terminated_by: Option<Termination>,
    pub precompute_seconds: Option<f64>,
    pub iterate_seconds: Option<f64>,
    pub error: Option<String>,
}

impl BenchRow {
    pub fn total_seconds(&self) -> Option<f64> {
        Some(self.precompute_seconds? + self.iterate_seconds?)
    }
}

pub const BENCH_CSV_HEADER: &str =
    "rho1,rho2,accuracy,iterations,terminated_by,precompute_s,iterate_s,error";

/// Trains on `train` for every pair and scores on `test`.
pub fn grid_search(
    train: &Dataset,
    test: &Dataset,
    base: &SolverConfig,
    grid: &[(f64, f64)],
) -> Vec<BenchRow> {
    grid.iter()
        .map(|&(rho1, rho2)| {
            let cfg = base.with_rho(rho1, rho2);
            let outcome = fit(train, &cfg).and_then(|rep| {
                let acc = rep.model.accuracy(test)?;
                Ok((rep, acc))
            });
            match outcome {
                Ok((rep, acc)) => BenchRow {
                    rho1,
                    rho2,
                    accuracy: Some(acc),
                    iterations: Some(rep.iterations),
                    terminated_by: Some(rep.terminated_by),
                    precompute_seconds: Some(rep.precompute_seconds),
                    iterate_seconds: Some(rep.iterate_seconds),
                    error: None,
                },
                Err(e) => BenchRow {
                    rho1,
                    rho2,
                    accuracy: None,
                    iterations: None,
                    terminated_by: None,
                    precompute_seconds: None,
                    iterate_seconds: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Highest accuracy, then fewest iterations, then earliest in grid order.
pub fn best_row(rows: &[BenchRow]) -> Option<&BenchRow> {
    let mut best: Option<&BenchRow> = None;
    for r in rows {
        let (Some(acc), Some(it)) = (r.accuracy, r.iterations) else {
            continue;
        };
        let better = match best {
            None => true,
            Some(b) => {
                let (bacc, bit) = (b.accuracy.unwrap(), b.iterations.unwrap());
                acc > bacc || (acc == bacc && it < bit)
            }
        };
        if better {
            best = Some(r);
        }
    }
    best
}

pub fn write_bench_csv<W: Write>(rows: &[BenchRow], mut out: W) -> Result<()> {
    fn opt<T: ToString>(x: Option<T>) -> String {
        x.map(|v| v.to_string()).unwrap_or_default()
    }
    writeln!(out, "{BENCH_CSV_HEADER}")?;
    for r in rows {
        let term = r.terminated_by.map(|t| match t {
            Termination::Tolerance => "tolerance",
            Termination::MaxIters => "max_iters",
        });
        let err = r
            .error
            .as_deref()
            .map(|e| format!("\"{}\"", e.replace('"', "'")));
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.rho1,
            r.rho2,
            opt(r.accuracy),
            opt(r.iterations),
            opt(term),
            opt(r.precompute_seconds),
            opt(r.iterate_seconds),
            err.unwrap_or_default()
        )?;
    }
    Ok(())
}
