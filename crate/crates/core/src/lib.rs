//! Sparse linear SVMs with nonconvex penalties, trained by ADMM.
//!
//! ```no_run
//! use ncsvm::{fit, read_libsvm_file, PenaltyConfig, PenaltyKind, SolverConfig};
//!
//! let ds = read_libsvm_file("heart_scale", None)?;
//! let penalty = PenaltyConfig::with_default_theta(PenaltyKind::Mcp, 0.015625)?;
//! let report = fit(&ds, &SolverConfig::new(penalty).with_rho(1.0, 1.0))?;
//! println!("{} iterations, accuracy {}", report.iterations, report.model.accuracy(&ds)?);
//! # Ok::<(), ncsvm::Error>(())
//! ```

pub mod admm;
pub mod bench;
pub mod data;
mod error;
pub mod model;
pub mod oracle;
pub mod penalty;
pub mod wsolve;

pub use admm::{fit, fit_checked, Admm, FitReport, SolverConfig, SolverState, Termination};
pub use data::{read_libsvm_file, stratified_split, Dataset, SparseMatrix, SplitSpec};
pub use error::{Error, Result};
pub use model::LinearModel;
pub use penalty::{prox, PenaltyConfig, PenaltyKind, ProxProblem};
pub use wsolve::{build_cache, Branch, FactorCache, HOperator};
