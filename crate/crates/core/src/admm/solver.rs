use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::updates::{
    augmented_lagrangian_with, constraint_residual, objective, true_objective, update_b,
    update_duals, update_s, update_xi, update_z, SolverState,
};
use super::SolverConfig;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::LinearModel;
use crate::wsolve::{assemble_f, build_cache_with, Branch, CacheOptions, FactorCache, HOperator};

/// One row of the iteration trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub objective: f64,
    pub rel_change: f64,
    /// `‖w − z‖₂`
    pub primal_residual_wz: f64,
    /// `‖Hw + by + ξ − s − 1‖₂`
    pub primal_residual_cons: f64,
    /// Distance between consecutive full states.
    pub state_delta: f64,
    /// Seconds since the first iteration started.
    pub wall_time: f64,
}

pub const TRACE_CSV_HEADER: &str =
    "iter,objective,rel_change,res_wz,res_cons,state_delta,wall_time_s";

/// Optimality diagnostics collected by [`Admm::step_checked`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepChecks {
    /// `|yᵀ(Hw + by + ξ − s − 1 + v)|` after the b-update.
    pub b_stationarity: f64,
    pub b_tolerance: f64,
    /// ∞-norm of the w-subproblem gradient after the w-update.
    pub w_stationarity: f64,
    pub w_tolerance: f64,
    /// Lagrangian before and after the primal sweep, duals held fixed.
    pub lagrangian_before: f64,
    pub lagrangian_after: f64,
}

/// Slack allowed for the primal sweep to raise the Lagrangian (round-off).
pub const LAGRANGIAN_SLACK: f64 = 1e-9;

impl StepChecks {
    pub fn b_ok(&self) -> bool {
        self.b_stationarity <= self.b_tolerance
    }

    pub fn w_ok(&self) -> bool {
        self.w_stationarity <= self.w_tolerance
    }

    pub fn descent_ok(&self) -> bool {
        self.lagrangian_after <= self.lagrangian_before + LAGRANGIAN_SLACK
    }

    pub fn all_ok(&self) -> bool {
        self.b_ok() && self.w_ok() && self.descent_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Tolerance,
    MaxIters,
}

/// Output of [`fit`].
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub model: LinearModel,
    /// Final `z`, the sparse copy of `w`.
    pub z: Vec<f64>,
    pub iterations: usize,
    pub terminated_by: Termination,
    pub branch: Branch,
    /// Factorization and setup time.
    pub precompute_seconds: f64,
    /// Time spent in the iterations.
    pub iterate_seconds: f64,
    pub final_objective: f64,
    /// Hinge loss plus `P(w)` at the returned model.
    pub true_objective: f64,
    pub config: SolverConfig,
    #[serde(skip)]
    pub trace: Vec<TraceRecord>,
}

impl FitReport {
    /// `(z, b)` as a model. `z` is the iterate the prox acts on, so its
    /// zeros are exact while `w` only approaches them as `w − z → 0`.
    pub fn sparse_model(&self) -> Result<LinearModel> {
        LinearModel::new(self.z.clone(), self.model.b, self.model.penalty_used)
    }

    pub fn total_seconds(&self) -> f64 {
        self.precompute_seconds + self.iterate_seconds
    }

    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<()> {
        write_trace_csv(&self.trace, out)
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

pub fn write_trace_csv<W: Write>(trace: &[TraceRecord], mut out: W) -> Result<()> {
    writeln!(out, "{TRACE_CSV_HEADER}")?;
    for r in trace {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iter,
            r.objective,
            r.rel_change,
            r.primal_residual_wz,
            r.primal_residual_cons,
            r.state_delta,
            r.wall_time
        )?;
    }
    Ok(())
}

/// Stepwise solver. [`fit`] drives it to convergence.
pub struct Admm<'a> {
    h: HOperator<'a>,
    cfg: SolverConfig,
    cache: FactorCache,
    state: SolverState,
    hw: Vec<f64>,
    objective: f64,
    precompute_seconds: f64,
    elapsed: f64,
}

impl<'a> Admm<'a> {
    pub fn new(ds: &'a Dataset, cfg: SolverConfig) -> Result<Self> {
        Self::with_options(ds, cfg, &CacheOptions::default())
    }

    pub fn with_options(ds: &'a Dataset, cfg: SolverConfig, opts: &CacheOptions) -> Result<Self> {
        let start = Instant::now();
        let state = super::initialize(ds.n_samples(), ds.n_features(), &cfg)?;
        let cache = build_cache_with(ds, cfg.rho1, cfg.rho2, opts)?;
        let objective = objective(&state.xi, &state.z, &cfg.penalty);
        Ok(Self {
            h: HOperator::new(ds),
            cfg,
            cache,
            hw: vec![0.0; ds.n_samples()],
            state,
            objective,
            precompute_seconds: start.elapsed().as_secs_f64(),
            elapsed: 0.0,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn cache(&self) -> &FactorCache {
        &self.cache
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn precompute_seconds(&self) -> f64 {
        self.precompute_seconds
    }

    pub fn elapsed_seconds(&self) -> f64 {
        self.elapsed
    }

    /// One full sweep: w, b, z, ξ, s, then the duals.
    pub fn step(&mut self) -> Result<TraceRecord> {
        Ok(self.advance(false)?.0)
    }

    /// [`Admm::step`] plus stationarity and descent diagnostics. The extra
    /// work is excluded from the timings.
    pub fn step_checked(&mut self) -> Result<(TraceRecord, StepChecks)> {
        let (rec, checks) = self.advance(true)?;
        Ok((rec, checks.expect("checks requested")))
    }

    fn advance(&mut self, check: bool) -> Result<(TraceRecord, Option<StepChecks>)> {
        let mut excluded = 0.0;
        let start = Instant::now();
        let cfg = self.cfg;
        let y = self.h.labels();
        let prev = self.state.clone();
        let k = prev.iter;

        let lagrangian_before = if check {
            let t = Instant::now();
            let mut hw = vec![0.0; self.h.n()];
            self.h.apply(&prev.w, &mut hw);
            let value = augmented_lagrangian_with(&prev, &hw, y, &cfg);
            excluded += t.elapsed().as_secs_f64();
            value
        } else {
            0.0
        };

        let rho = cfg.rho1 / cfg.rho2;
        let f = assemble_f(
            &prev.z, &prev.u, &prev.s, &prev.xi, &prev.v, prev.b, &self.h, rho,
        )?;
        let w = self.cache.solve_w(&self.h, &f)?;
        self.h.apply(&w, &mut self.hw);

        let w_check = if check {
            let t = Instant::now();
            let r: Vec<f64> = (0..self.h.n())
                .map(|i| self.hw[i] + prev.b * y[i] + prev.xi[i] - prev.s[i] - 1.0 + prev.v[i])
                .collect();
            let mut g = vec![0.0; self.h.d()];
            self.h.apply_transpose(&r, &mut g);
            let mut worst = 0.0f64;
            for j in 0..g.len() {
                let gj = cfg.rho1 * (w[j] - prev.z[j] + prev.u[j]) + cfg.rho2 * g[j];
                worst = worst.max(gj.abs());
            }
            let f_inf = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            excluded += t.elapsed().as_secs_f64();
            Some((worst, 1e-6 * (1.0 + f_inf)))
        } else {
            None
        };

        let b = update_b(&self.hw, y, &prev.s, &prev.xi, &prev.v)?;
        let b_check = check.then(|| {
            let r: f64 = (0..y.len())
                .map(|i| y[i] * (self.hw[i] + b * y[i] + prev.xi[i] - prev.s[i] - 1.0 + prev.v[i]))
                .sum();
            (r.abs(), 1e-8 * y.len() as f64)
        });

        let z = update_z(&w, &prev.u, &prev.z, &cfg)?;
        let xi = update_xi(&self.hw, y, &prev.s, &prev.v, b, cfg.rho2)?;
        let s = update_s(&self.hw, y, &xi, &prev.v, b)?;

        let mut next = SolverState {
            w,
            b,
            z,
            xi,
            s,
            u: prev.u.clone(),
            v: prev.v.clone(),
            iter: k + 1,
        };

        let lagrangian_after = if check {
            let t = Instant::now();
            let value = augmented_lagrangian_with(&next, &self.hw, y, &cfg);
            excluded += t.elapsed().as_secs_f64();
            value
        } else {
            0.0
        };

        update_duals(&mut next, &self.hw, y)?;
        if let Some(var) = next.first_non_finite() {
            return Err(Error::NonFinite { var, iter: k + 1 });
        }

        let cons = constraint_residual(&self.hw, y, next.b, &next.xi, &next.s);
        let obj = objective(&next.xi, &next.z, &cfg.penalty);
        if !obj.is_finite() {
            return Err(Error::NonFinite {
                var: "objective",
                iter: k + 1,
            });
        }
        let rel_change = (obj - self.objective).abs() / self.objective.abs().max(1e-12);
        let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let wz: Vec<f64> = next.w.iter().zip(&next.z).map(|(a, b)| a - b).collect();
        let state_delta = next.distance(&prev);

        self.state = next;
        self.objective = obj;
        self.elapsed += start.elapsed().as_secs_f64() - excluded;

        let rec = TraceRecord {
            iter: k + 1,
            objective: obj,
            rel_change,
            primal_residual_wz: norm(&wz),
            primal_residual_cons: norm(&cons),
            state_delta,
            wall_time: self.elapsed,
        };
        let checks = match (w_check, b_check) {
            (Some((ws, wt)), Some((bs, bt))) => Some(StepChecks {
                b_stationarity: bs,
                b_tolerance: bt,
                w_stationarity: ws,
                w_tolerance: wt,
                lagrangian_before,
                lagrangian_after,
            }),
            _ => None,
        };
        Ok((rec, checks))
    }

    /// Current `(w, b)` as a model.
    pub fn model(&self) -> Result<LinearModel> {
        LinearModel::new(self.state.w.clone(), self.state.b, self.cfg.penalty)
    }

    fn into_report(self, trace: Vec<TraceRecord>, terminated_by: Termination) -> Result<FitReport> {
        let model = self.model()?;
        let true_objective = true_objective(&model, self.h.dataset(), &self.cfg.penalty)?;
        Ok(FitReport {
            model,
            z: self.state.z,
            iterations: self.state.iter,
            terminated_by,
            branch: self.cache.branch(),
            precompute_seconds: self.precompute_seconds,
            iterate_seconds: self.elapsed,
            final_objective: self.objective,
            true_objective,
            config: self.cfg,
            trace,
        })
    }
}

/// Runs ADMM from the zero state until the relative objective change falls
/// below `epsilon` or `max_iters` sweeps have run.
pub fn fit(ds: &Dataset, cfg: &SolverConfig) -> Result<FitReport> {
    fit_with(ds, cfg, &CacheOptions::default())
}

pub fn fit_with(ds: &Dataset, cfg: &SolverConfig, opts: &CacheOptions) -> Result<FitReport> {
    run(
        Admm::with_options(ds, *cfg, opts)?,
        |s| s.step().map(|r| (r, ())),
        |_| {},
    )
}

/// [`fit`] that also returns per-iteration [`StepChecks`].
pub fn fit_checked(ds: &Dataset, cfg: &SolverConfig) -> Result<(FitReport, Vec<StepChecks>)> {
    fit_checked_with(ds, cfg, &CacheOptions::default())
}

pub fn fit_checked_with(
    ds: &Dataset,
    cfg: &SolverConfig,
    opts: &CacheOptions,
) -> Result<(FitReport, Vec<StepChecks>)> {
    let mut checks = Vec::new();
    let report = run(
        Admm::with_options(ds, *cfg, opts)?,
        |s| s.step_checked(),
        |c| checks.push(c),
    )?;
    Ok((report, checks))
}

fn run<T>(
    mut admm: Admm<'_>,
    mut step: impl FnMut(&mut Admm<'_>) -> Result<(TraceRecord, T)>,
    mut sink: impl FnMut(T),
) -> Result<FitReport> {
    let (eps, max_iters) = (admm.cfg.epsilon, admm.cfg.max_iters);
    let mut trace = Vec::new();
    loop {
        let (rec, extra) = step(&mut admm)?;
        sink(extra);
        trace.push(rec);
        if rec.rel_change < eps {
            return admm.into_report(trace, Termination::Tolerance);
        }
        if rec.iter >= max_iters {
            return admm.into_report(trace, Termination::MaxIters);
        }
    }
}
