//! Closed-form block updates.
//!
//! Every function taking `hw` expects `Hw` for the current `w⁽ᵏ⁺¹⁾`.

use serde::{Deserialize, Serialize};

use super::SolverConfig;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::LinearModel;
use crate::penalty::{prox_vector, PenaltyConfig};
use crate::wsolve::HOperator;

/// All ADMM variables at one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverState {
    pub w: Vec<f64>,
    pub b: f64,
    pub z: Vec<f64>,
    pub xi: Vec<f64>,
    pub s: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub iter: usize,
}

impl SolverState {
    /// The all-zero starting point.
    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            w: vec![0.0; d],
            b: 0.0,
            z: vec![0.0; d],
            xi: vec![0.0; n],
            s: vec![0.0; n],
            u: vec![0.0; d],
            v: vec![0.0; n],
            iter: 0,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.xi.len(), self.w.len())
    }

    /// Euclidean distance over all blocks, `b` included.
    pub fn distance(&self, other: &Self) -> f64 {
        let sq =
            |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum() };
        (sq(&self.w, &other.w)
            + (self.b - other.b).powi(2)
            + sq(&self.z, &other.z)
            + sq(&self.xi, &other.xi)
            + sq(&self.s, &other.s)
            + sq(&self.u, &other.u)
            + sq(&self.v, &other.v))
        .sqrt()
    }

    pub(crate) fn first_non_finite(&self) -> Option<&'static str> {
        let bad = |x: &[f64]| x.iter().any(|v| !v.is_finite());
        if bad(&self.w) {
            Some("w")
        } else if !self.b.is_finite() {
            Some("b")
        } else if bad(&self.z) {
            Some("z")
        } else if bad(&self.xi) {
            Some("xi")
        } else if bad(&self.s) {
            Some("s")
        } else if bad(&self.u) {
            Some("u")
        } else if bad(&self.v) {
            Some("v")
        } else {
            None
        }
    }
}

/// Zero state for `n` samples and `d` features, after validating `cfg`.
pub fn initialize(n: usize, d: usize, cfg: &SolverConfig) -> Result<SolverState> {
    cfg.validate()?;
    if n == 0 || d == 0 {
        return Err(Error::Dimension(format!(
            "need n, d >= 1, got n={n}, d={d}"
        )));
    }
    Ok(SolverState::zeros(n, d))
}

fn check_len(name: &str, got: usize, want: usize) -> Result<()> {
    if got == want {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{name} has length {got}, expected {want}"
        )))
    }
}

/// `b = yᵀ(s + 1 − Hw − ξ − v) / n`.
pub fn update_b(hw: &[f64], y: &[f64], s: &[f64], xi: &[f64], v: &[f64]) -> Result<f64> {
    let n = y.len();
    for (name, x) in [("hw", hw), ("s", s), ("xi", xi), ("v", v)] {
        check_len(name, x.len(), n)?;
    }
    if n == 0 {
        return Err(Error::Dimension(
            "b-update needs at least one sample".into(),
        ));
    }
    let sum: f64 = (0..n)
        .map(|i| y[i] * (s[i] + 1.0 - hw[i] - xi[i] - v[i]))
        .sum();
    Ok(sum / n as f64)
}

/// Proximal z-update at `ψ = w + u`.
///
/// With `β > 0` the extra term `(β/2)‖z − z_prev‖²` folds into a prox at the
/// weighted target `(ρ₁ψ + β z_prev)/(ρ₁ + β)` with modulus `ρ₁ + β`.
pub fn update_z(w: &[f64], u: &[f64], z_prev: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>> {
    check_len("u", u.len(), w.len())?;
    check_len("z_prev", z_prev.len(), w.len())?;
    let (rho1, beta) = (cfg.rho1, cfg.beta);
    if beta == 0.0 {
        let psi: Vec<f64> = w.iter().zip(u).map(|(a, b)| a + b).collect();
        prox_vector(&psi, rho1, &cfg.penalty)
    } else {
        let m = rho1 + beta;
        let target: Vec<f64> = (0..w.len())
            .map(|j| (rho1 * (w[j] + u[j]) + beta * z_prev[j]) / m)
            .collect();
        prox_vector(&target, m, &cfg.penalty)
    }
}

/// `ξ = max(s + 1 − v − Hw − b y − 1/(nρ₂), 0)`.
pub fn update_xi(
    hw: &[f64],
    y: &[f64],
    s: &[f64],
    v: &[f64],
    b: f64,
    rho2: f64,
) -> Result<Vec<f64>> {
    let n = y.len();
    for (name, x) in [("hw", hw), ("s", s), ("v", v)] {
        check_len(name, x.len(), n)?;
    }
    let shift = 1.0 / (n as f64 * rho2);
    Ok((0..n)
        .map(|i| (s[i] + 1.0 - v[i] - hw[i] - b * y[i] - shift).max(0.0))
        .collect())
}

/// `s = max(Hw + b y + ξ − 1 + v, 0)`.
pub fn update_s(hw: &[f64], y: &[f64], xi: &[f64], v: &[f64], b: f64) -> Result<Vec<f64>> {
    let n = y.len();
    for (name, x) in [("hw", hw), ("xi", xi), ("v", v)] {
        check_len(name, x.len(), n)?;
    }
    Ok((0..n)
        .map(|i| (hw[i] + b * y[i] + xi[i] - 1.0 + v[i]).max(0.0))
        .collect())
}

/// `Hw + b y + ξ − s − 1`.
pub fn constraint_residual(hw: &[f64], y: &[f64], b: f64, xi: &[f64], s: &[f64]) -> Vec<f64> {
    (0..y.len())
        .map(|i| hw[i] + b * y[i] + xi[i] - s[i] - 1.0)
        .collect()
}

/// `u += w − z` and `v += Hw + b y + ξ − s − 1`, with the new primal values.
pub fn update_duals(state: &mut SolverState, hw: &[f64], y: &[f64]) -> Result<()> {
    let (n, d) = state.dims();
    check_len("hw", hw.len(), n)?;
    check_len("y", y.len(), n)?;
    check_len("z", state.z.len(), d)?;
    for j in 0..d {
        state.u[j] += state.w[j] - state.z[j];
    }
    for i in 0..n {
        state.v[i] += hw[i] + state.b * y[i] + state.xi[i] - state.s[i] - 1.0;
    }
    Ok(())
}

/// Surrogate objective `(1/n)1ᵀξ + P(z)` tracked by the stopping rule.
pub fn objective(xi: &[f64], z: &[f64], penalty: &PenaltyConfig) -> f64 {
    let n = xi.len().max(1) as f64;
    xi.iter().sum::<f64>() / n + penalty.total(z)
}

/// Hinge-loss objective `(1/n)Σ max(0, 1 − yᵢ(wᵀxᵢ + b)) + P(w)`.
pub fn true_objective(model: &LinearModel, ds: &Dataset, penalty: &PenaltyConfig) -> Result<f64> {
    check_len("w", model.w.len(), ds.n_features())?;
    let mut hinge = 0.0;
    for (row, &y) in ds.features().rows().zip(ds.labels()) {
        hinge += (1.0 - y * (row.dot(&model.w) + model.b)).max(0.0);
    }
    Ok(hinge / ds.n_samples() as f64 + penalty.total(&model.w))
}

/// Scaled-dual augmented Lagrangian
/// `(1/n)1ᵀξ + P(z) + (ρ₁/2)‖w − z + u‖² + (ρ₂/2)‖Hw + by + ξ − s − 1 + v‖²
///  − (ρ₁/2)‖u‖² − (ρ₂/2)‖v‖²`.
pub fn augmented_lagrangian(
    state: &SolverState,
    h: &HOperator<'_>,
    cfg: &SolverConfig,
) -> Result<f64> {
    let (n, d) = (h.n(), h.d());
    check_len("w", state.w.len(), d)?;
    check_len("xi", state.xi.len(), n)?;
    let mut hw = vec![0.0; n];
    h.apply(&state.w, &mut hw);
    Ok(augmented_lagrangian_with(state, &hw, h.labels(), cfg))
}

pub(crate) fn augmented_lagrangian_with(
    st: &SolverState,
    hw: &[f64],
    y: &[f64],
    cfg: &SolverConfig,
) -> f64 {
    let split: f64 = (0..st.w.len())
        .map(|j| (st.w[j] - st.z[j] + st.u[j]).powi(2))
        .sum();
    let cons: f64 = (0..y.len())
        .map(|i| (hw[i] + st.b * y[i] + st.xi[i] - st.s[i] - 1.0 + st.v[i]).powi(2))
        .sum();
    let uu: f64 = st.u.iter().map(|x| x * x).sum();
    let vv: f64 = st.v.iter().map(|x| x * x).sum();
    objective(&st.xi, &st.z, &cfg.penalty)
        + 0.5 * cfg.rho1 * (split - uu)
        + 0.5 * cfg.rho2 * (cons - vv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SparseMatrix;
    use crate::oracle::grid_minimize;
    use crate::penalty::{PenaltyKind, ProxProblem};

    fn cfg(kind: PenaltyKind) -> SolverConfig {
        SolverConfig::new(PenaltyConfig::with_default_theta(kind, 0.1).unwrap())
    }

    fn toy() -> Dataset {
        let x =
            SparseMatrix::from_dense_rows(&[vec![1.0, 0.5], vec![-0.3, 2.0], vec![0.7, -1.1]], 2)
                .unwrap();
        Dataset::new(x, vec![1.0, -1.0, 1.0]).unwrap()
    }

    #[test]
    fn zero_state_shapes() {
        let st = initialize(3, 2, &cfg(PenaltyKind::Scad)).unwrap();
        assert_eq!(st.w.len(), 2);
        assert_eq!(st.z.len(), 2);
        assert_eq!(st.u.len(), 2);
        assert_eq!(st.xi.len(), 3);
        assert_eq!(st.s.len(), 3);
        assert_eq!(st.v.len(), 3);
        assert_eq!(st.b, 0.0);
        assert!(st.w.iter().chain(&st.xi).all(|&x| x == 0.0));
        let bad = SolverConfig {
            rho1: -1.0,
            ..cfg(PenaltyKind::Scad)
        };
        assert!(initialize(3, 2, &bad).is_err());
        assert!(initialize(0, 2, &cfg(PenaltyKind::Scad)).is_err());
    }

    #[test]
    fn b_update_values() {
        let y = [1.0, -1.0];
        let zeros = [0.0, 0.0];
        // y = (1,1)-style symmetric case: Hw = 0 gives yᵀ1 / n
        assert_eq!(
            update_b(&zeros, &[1.0, 1.0], &zeros, &zeros, &zeros).unwrap(),
            1.0
        );
        assert_eq!(update_b(&zeros, &y, &zeros, &zeros, &zeros).unwrap(), 0.0);
        assert_eq!(
            update_b(&[1.0, 1.0], &[1.0, 1.0], &zeros, &zeros, &zeros).unwrap(),
            0.0
        );
        assert!(update_b(&[0.0], &y, &zeros, &zeros, &zeros).is_err());
    }

    #[test]
    fn b_is_the_exact_minimizer() {
        // The b-term of the Lagrangian is ½‖r + b y‖² with r = Hw + ξ − s − 1 + v.
        let y = [1.0, -1.0, 1.0, 1.0];
        let hw = [0.3, -1.2, 2.0, 0.1];
        let s = [0.0, 0.5, 1.0, 0.0];
        let xi = [0.2, 0.0, 0.0, 0.7];
        let v = [-0.1, 0.4, 0.0, 0.3];
        let b = update_b(&hw, &y, &s, &xi, &v).unwrap();
        let g = |bb: f64| -> f64 {
            (0..4)
                .map(|i| (hw[i] + bb * y[i] + xi[i] - s[i] - 1.0 + v[i]).powi(2))
                .sum()
        };
        let grid = grid_minimize(g, -10.0, 10.0, 100_001);
        assert!((b - grid).abs() < 1e-6);
    }

    #[test]
    fn xi_and_s_values() {
        let xi = update_xi(&[0.0; 4], &[1.0; 4], &[0.0; 4], &[0.0; 4], 0.0, 1.0).unwrap();
        assert_eq!(xi, vec![0.75; 4]);
        let xi = update_xi(&[5.0], &[1.0], &[0.0], &[0.0], 0.0, 1.0).unwrap();
        assert_eq!(xi, vec![0.0]);
        let s = update_s(&[0.0; 2], &[1.0; 2], &[0.0; 2], &[0.0; 2], 0.0).unwrap();
        assert_eq!(s, vec![0.0; 2]);
        let s = update_s(&[2.0], &[1.0], &[0.0], &[0.0], 0.5).unwrap();
        assert_eq!(s, vec![1.5]);
        assert!(update_s(&[0.0], &[1.0, 1.0], &[0.0], &[0.0], 0.0).is_err());
    }

    #[test]
    fn xi_s_match_grid_oracle() {
        // ξᵢ minimizes ξ/n + (ρ₂/2)(a + ξ)² over ξ ≥ 0 with a = Hw + by − s − 1 + v.
        let n = 5usize;
        let rho2 = 0.7;
        let y = [1.0, -1.0, 1.0, -1.0, 1.0];
        let hw = [0.2, -0.5, 3.0, 0.0, 1.1];
        let s = [0.0, 0.3, 0.0, 2.0, 0.1];
        let v = [0.1, -0.2, 0.0, 0.5, -1.0];
        let b = 0.25;
        let xi = update_xi(&hw, &y, &s, &v, b, rho2).unwrap();
        for i in 0..n {
            let a = hw[i] + b * y[i] - s[i] - 1.0 + v[i];
            let h = |t: f64| t / n as f64 + 0.5 * rho2 * (a + t).powi(2);
            let g = grid_minimize(h, 0.0, 10.0, 100_001);
            assert!((xi[i] - g).abs() < 1e-6, "{i}: {} vs {g}", xi[i]);
        }
        let s_new = update_s(&hw, &y, &xi, &v, b).unwrap();
        for i in 0..n {
            let c = hw[i] + b * y[i] + xi[i] - 1.0 + v[i];
            let g = grid_minimize(|t| (c - t).powi(2), 0.0, 10.0, 100_001);
            assert!((s_new[i] - g).abs() < 1e-6);
        }
    }

    #[test]
    fn z_update_matches_prox_and_oracle() {
        for kind in PenaltyKind::ALL {
            let mut c = cfg(kind);
            c.rho1 = 2.5;
            let w = [0.8, -0.03, 0.2];
            let u = [-0.1, 0.01, 0.15];
            let z = update_z(&w, &u, &[0.0; 3], &c).unwrap();
            for j in 0..3 {
                let p = ProxProblem::new(w[j] + u[j], c.rho1, c.penalty).unwrap();
                let g = crate::oracle::prox_oracle_default(&p);
                assert!(p.objective(z[j]) <= p.objective(g) + 1e-10);
            }
        }
    }

    #[test]
    fn z_update_with_beta_minimizes_the_augmented_term() {
        for kind in PenaltyKind::ALL {
            let mut c = cfg(kind);
            c.rho1 = 1.5;
            c.beta = 0.8;
            let w = [0.5, -0.2, 0.05];
            let u = [0.1, -0.3, 0.0];
            let zp = [0.4, 0.0, 0.3];
            let z = update_z(&w, &u, &zp, &c).unwrap();
            for j in 0..3 {
                let h = |t: f64| {
                    c.penalty.value(t)
                        + 0.5 * c.rho1 * (w[j] - t + u[j]).powi(2)
                        + 0.5 * c.beta * (t - zp[j]).powi(2)
                };
                let g = grid_minimize(h, -5.0, 5.0, 100_001);
                assert!(h(z[j]) <= h(g) + 1e-10, "{kind} {j}");
            }
        }
    }

    #[test]
    fn z_update_large_beta_keeps_previous() {
        let mut c = cfg(PenaltyKind::Lsp);
        c.beta = 1e12;
        let zp = [0.7, -1.3];
        let z = update_z(&[5.0, 5.0], &[0.0, 0.0], &zp, &c).unwrap();
        for j in 0..2 {
            assert!((z[j] - zp[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn duals() {
        let mut st = SolverState::zeros(2, 2);
        st.w = vec![1.0, 2.0];
        st.z = vec![1.0, 1.0];
        update_duals(&mut st, &[0.0, 0.0], &[1.0, -1.0]).unwrap();
        assert_eq!(st.u, vec![0.0, 1.0]);
        assert_eq!(st.v, vec![-1.0, -1.0]);

        // feasible point leaves the duals unchanged
        let mut st = SolverState::zeros(1, 1);
        st.w = vec![0.5];
        st.z = vec![0.5];
        st.s = vec![0.5];
        st.xi = vec![1.0];
        update_duals(&mut st, &[0.5], &[1.0]).unwrap();
        assert_eq!((st.u[0], st.v[0]), (0.0, 0.0));
    }

    #[test]
    fn objectives_at_known_points() {
        let pen = PenaltyConfig::with_default_theta(PenaltyKind::CappedL1, 0.1).unwrap();
        assert_eq!(objective(&[0.0; 3], &[0.0; 2], &pen), 0.0);
        assert!((objective(&[0.0; 3], &[5.0, 0.0], &pen) - 0.1).abs() < 1e-15);
        assert!((objective(&[1.0, 2.0, 0.0], &[0.0], &pen) - 1.0).abs() < 1e-15);

        let ds = toy();
        let m = LinearModel::new(vec![0.0, 0.0], 0.0, pen).unwrap();
        assert_eq!(true_objective(&m, &ds, &pen).unwrap(), 1.0);
    }

    #[test]
    fn lagrangian_zero_state() {
        // Only the margin term survives: (ρ₂/2)·n.
        let ds = toy();
        let c = cfg(PenaltyKind::Mcp).with_rho(1.0, 2.0);
        let h = HOperator::new(&ds);
        let st = SolverState::zeros(3, 2);
        assert_eq!(augmented_lagrangian(&st, &h, &c).unwrap(), 3.0);
    }

    #[test]
    fn lagrangian_at_feasible_point() {
        let ds = toy();
        let c = cfg(PenaltyKind::Lsp);
        let h = HOperator::new(&ds);
        let mut st = SolverState::zeros(3, 2);
        st.xi = vec![1.0; 3];
        assert!((augmented_lagrangian(&st, &h, &c).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn state_distance_and_finiteness() {
        let a = SolverState::zeros(2, 1);
        let mut b = a.clone();
        b.b = 3.0;
        b.v[1] = 4.0;
        assert_eq!(a.distance(&b), 5.0);
        assert_eq!(b.first_non_finite(), None);
        b.u[0] = f64::NAN;
        assert_eq!(b.first_non_finite(), Some("u"));
    }
}
