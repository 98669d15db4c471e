//! ADMM training loop for the penalized linear SVM.
//!
//! The hinge loss is written with slacks `ξ, s ≥ 0` and the constraint
//! `Hw + by + ξ = s + 1`, and the penalty acts on a copy `z` of `w`. Each
//! sweep updates w, b, z, ξ, s in that order and then the scaled duals.

mod config;
mod solver;
mod updates;

pub use config::{SolverConfig, DEFAULT_EPSILON, DEFAULT_MAX_ITERS};
pub use solver::{
    fit, fit_checked, fit_checked_with, fit_with, write_trace_csv, Admm, FitReport, StepChecks,
    Termination, TraceRecord, LAGRANGIAN_SLACK, TRACE_CSV_HEADER,
};
pub use updates::{
    augmented_lagrangian, constraint_residual, initialize, objective, true_objective, update_b,
    update_duals, update_s, update_xi, update_z, SolverState,
};
