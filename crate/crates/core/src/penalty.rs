//! Nonconvex sparsity penalties and their exact scalar proximal operators.
//!
//! For a target `ψ` and modulus `ρ₁` the proximal problem is
//!
//! ```text
//! h(z) = ½ (z − ψ)² + p_λ(z) / ρ₁
//! ```
//!
//! Every penalty here is even in `z`, so each solver works on `a = |ψ|`,
//! evaluates `h` on a small candidate set (one stationary point per smooth
//! piece of the penalty, clipped to that piece), keeps the best candidate, and
//! restores the sign of `ψ`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyKind {
    /// Log-sum penalty `λ log(1 + |w|/θ)`.
    Lsp,
    /// Smoothly clipped absolute deviation, `θ > 2`.
    Scad,
    /// Minimax concave penalty.
    Mcp,
    /// `λ min(|w|, θ)`.
    CappedL1,
}

impl PenaltyKind {
    pub const ALL: [PenaltyKind; 4] = [
        PenaltyKind::Lsp,
        PenaltyKind::Scad,
        PenaltyKind::Mcp,
        PenaltyKind::CappedL1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PenaltyKind::Lsp => "lsp",
            PenaltyKind::Scad => "scad",
            PenaltyKind::Mcp => "mcp",
            PenaltyKind::CappedL1 => "capped_l1",
        }
    }

    /// 3.7 for SCAD and 3 for MCP. LSP and capped-ℓ1 have no customary
    /// value; they default to 1.
    pub fn default_theta(self) -> f64 {
        match self {
            PenaltyKind::Scad => 3.7,
            PenaltyKind::Mcp => 3.0,
            PenaltyKind::Lsp | PenaltyKind::CappedL1 => 1.0,
        }
    }
}

impl fmt::Display for PenaltyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PenaltyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lsp" => Ok(PenaltyKind::Lsp),
            "scad" => Ok(PenaltyKind::Scad),
            "mcp" => Ok(PenaltyKind::Mcp),
            "capped_l1" => Ok(PenaltyKind::CappedL1),
            other => Err(Error::InvalidPenalty(format!(
                "unknown penalty `{other}` (expected lsp, scad, mcp or capped_l1)"
            ))),
        }
    }
}

/// Default regularization strength, 2⁻⁶.
pub const DEFAULT_LAMBDA: f64 = 0.015625;

/// Penalty kind with its tuning parameter `λ` and shape parameter `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPenalty")]
pub struct PenaltyConfig {
    pub kind: PenaltyKind,
    pub lambda: f64,
    pub theta: f64,
}

#[derive(Deserialize)]
struct RawPenalty {
    kind: PenaltyKind,
    lambda: f64,
    theta: f64,
}

impl TryFrom<RawPenalty> for PenaltyConfig {
    type Error = Error;

    fn try_from(raw: RawPenalty) -> Result<Self> {
        PenaltyConfig::new(raw.kind, raw.lambda, raw.theta)
    }
}

impl PenaltyConfig {
    pub fn new(kind: PenaltyKind, lambda: f64, theta: f64) -> Result<Self> {
        let cfg = Self {
            kind,
            lambda,
            theta,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_default_theta(kind: PenaltyKind, lambda: f64) -> Result<Self> {
        Self::new(kind, lambda, kind.default_theta())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidPenalty(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::InvalidPenalty(format!(
                "theta must be positive and finite, got {}",
                self.theta
            )));
        }
        if self.kind == PenaltyKind::Scad && self.theta <= 2.0 {
            return Err(Error::InvalidPenalty(format!(
                "scad requires theta > 2, got {}",
                self.theta
            )));
        }
        Ok(())
    }

    /// `p_λ(w)`
    pub fn value(&self, w: f64) -> f64 {
        let a = w.abs();
        let (lam, th) = (self.lambda, self.theta);
        match self.kind {
            PenaltyKind::Lsp => lam * (a / th).ln_1p(),
            PenaltyKind::Scad => {
                if a <= lam {
                    lam * a
                } else if a <= th * lam {
                    (-a * a + 2.0 * th * lam * a - lam * lam) / (2.0 * (th - 1.0))
                } else {
                    (th + 1.0) * lam * lam / 2.0
                }
            }
            PenaltyKind::Mcp => {
                if a <= th * lam {
                    lam * a - a * a / (2.0 * th)
                } else {
                    th * lam * lam / 2.0
                }
            }
            PenaltyKind::CappedL1 => lam * a.min(th),
        }
    }

    /// `P(z) = Σⱼ p_λ(zⱼ)`
    pub fn total(&self, z: &[f64]) -> f64 {
        z.iter().map(|&zj| self.value(zj)).sum()
    }
}

pub fn penalty_value(cfg: &PenaltyConfig, w: f64) -> f64 {
    cfg.value(w)
}

pub fn penalty_total(cfg: &PenaltyConfig, z: &[f64]) -> f64 {
    cfg.total(z)
}

/// One scalar proximal problem `argmin_z ½(z − ψ)² + p_λ(z)/ρ₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxProblem {
    pub psi: f64,
    pub rho1: f64,
    pub penalty: PenaltyConfig,
}

impl ProxProblem {
    pub fn new(psi: f64, rho1: f64, penalty: PenaltyConfig) -> Result<Self> {
        let p = Self { psi, rho1, penalty };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.penalty.validate()?;
        if !(self.rho1 > 0.0 && self.rho1.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "rho1 must be positive and finite, got {}",
                self.rho1
            )));
        }
        if !self.psi.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "prox target is not finite: {}",
                self.psi
            )));
        }
        Ok(())
    }

    /// `h(z)`, the exact objective including `p_λ(z)/ρ₁`.
    pub fn objective(&self, z: f64) -> f64 {
        let d = z - self.psi;
        0.5 * d * d + self.penalty.value(z) / self.rho1
    }
}

/// Global minimizer of the scalar proximal problem.
pub fn prox(p: &ProxProblem) -> Result<f64> {
    p.validate()?;
    Ok(prox_unchecked(p.psi, p.rho1, &p.penalty))
}

/// Element-wise [`prox`] with `ψᵢ = targetᵢ`.
pub fn prox_vector(target: &[f64], rho1: f64, cfg: &PenaltyConfig) -> Result<Vec<f64>> {
    let mut out = vec![0.0; target.len()];
    prox_vector_into(target, rho1, cfg, &mut out)?;
    Ok(out)
}

pub fn prox_vector_into(
    target: &[f64],
    rho1: f64,
    cfg: &PenaltyConfig,
    out: &mut [f64],
) -> Result<()> {
    if target.len() != out.len() {
        return Err(Error::Dimension(format!(
            "prox target has length {}, output {}",
            target.len(),
            out.len()
        )));
    }
    ProxProblem::new(0.0, rho1, *cfg)?;
    for (o, &psi) in out.iter_mut().zip(target) {
        if !psi.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "prox target is not finite: {psi}"
            )));
        }
        *o = prox_unchecked(psi, rho1, cfg);
    }
    Ok(())
}

/// Keeps the candidate with the smaller objective; on ties the smaller
/// magnitude wins. Candidates are all nonnegative here.
struct Best<F: Fn(f64) -> f64> {
    h: F,
    z: f64,
    value: f64,
}

impl<F: Fn(f64) -> f64> Best<F> {
    fn new(h: F) -> Self {
        let value = h(0.0);
        Self { h, z: 0.0, value }
    }

    fn offer(&mut self, z: f64) {
        let value = (self.h)(z);
        if value < self.value || (value == self.value && z < self.z) {
            self.z = z;
            self.value = value;
        }
    }
}

pub(crate) fn prox_unchecked(psi: f64, rho1: f64, cfg: &PenaltyConfig) -> f64 {
    if psi == 0.0 {
        return 0.0;
    }
    let a = psi.abs();
    let (lam, th, r) = (cfg.lambda, cfg.theta, rho1);
    // h restricted to z ≥ 0 with target |ψ|; equal to h(sign(ψ)·z).
    let h = |z: f64| {
        let d = z - a;
        0.5 * d * d + cfg.value(z) / r
    };
    let mut best = Best::new(h);

    match cfg.kind {
        PenaltyKind::Lsp => {
            // Roots of ρ₁z² + ρ₁(θ − a)z + (λ − ρ₁aθ) = 0.
            let disc = r * r * (a - th).powi(2) - 4.0 * r * (lam - r * a * th);
            if disc > 0.0 {
                let sq = disc.sqrt();
                best.offer(((r * (a - th) + sq) / (2.0 * r)).max(0.0));
                best.offer(((r * (a - th) - sq) / (2.0 * r)).max(0.0));
            }
        }
        PenaltyKind::Scad => {
            // |z| ≤ λ: soft threshold clipped to [0, λ].
            best.offer(lam.min((a - lam / r).max(0.0)));
            // λ < |z| ≤ θλ: h'' = 1 − 1/(ρ₁(θ−1)). When the piece is concave its
            // minimum sits on an endpoint, which the neighbouring pieces cover.
            let curv = r * (th - 1.0) - 1.0;
            if curv > 0.0 {
                let stat = (r * a * (th - 1.0) - th * lam) / curv;
                best.offer((th * lam).min(stat.max(lam)));
            }
            // |z| > θλ: constant penalty.
            best.offer((th * lam).max(a));
        }
        PenaltyKind::Mcp => {
            // |z| ≤ θλ: h'' = 1 − 1/(ρ₁θ); degenerate (linear or concave) when
            // ρ₁θ ≤ 1, leaving only the endpoints {0, θλ}.
            best.offer(th * lam);
            let curv = r * th - 1.0;
            if curv > 0.0 {
                let stat = th * (r * a - lam) / curv;
                best.offer((th * lam).min(stat.max(0.0)));
            }
            best.offer((th * lam).max(a));
        }
        PenaltyKind::CappedL1 => {
            best.offer(th.min((a - lam / r).max(0.0)));
            best.offer(th.max(a));
        }
    }

    if best.z == 0.0 {
        0.0
    } else {
        best.z.copysign(psi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::prox_oracle_default;
    use proptest::prelude::*;

    fn cfg(kind: PenaltyKind, lambda: f64, theta: f64) -> PenaltyConfig {
        PenaltyConfig::new(kind, lambda, theta).unwrap()
    }

    #[test]
    fn table_values() {
        assert_eq!(cfg(PenaltyKind::Scad, 1.0, 3.7).value(0.5), 0.5);
        assert_eq!(cfg(PenaltyKind::Mcp, 1.0, 3.0).value(10.0), 1.5);
        assert_eq!(cfg(PenaltyKind::CappedL1, 2.0, 1.0).value(3.0), 2.0);
        for kind in PenaltyKind::ALL {
            let c = PenaltyConfig::with_default_theta(kind, 0.3).unwrap();
            assert_eq!(c.value(0.0), 0.0);
            assert_eq!(c.value(-1.3), c.value(1.3));
        }
        let lsp = cfg(PenaltyKind::Lsp, 2.0, 0.5);
        assert!((lsp.value(1.0) - 2.0 * 3.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn totals() {
        let c = cfg(PenaltyKind::CappedL1, 1.0, 1.0);
        assert_eq!(c.total(&[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(c.total(&[3.0, -3.0]), 2.0);
        let s = cfg(PenaltyKind::Scad, 0.7, 3.7);
        assert_eq!(s.total(&[1.9]), s.value(1.9));
    }

    #[test]
    fn config_validation() {
        assert!(PenaltyConfig::new(PenaltyKind::Scad, 1.0, 2.0).is_err());
        assert!(PenaltyConfig::new(PenaltyKind::Scad, 1.0, 2.0001).is_ok());
        assert!(PenaltyConfig::new(PenaltyKind::Mcp, 0.0, 3.0).is_err());
        assert!(PenaltyConfig::new(PenaltyKind::Lsp, 1.0, 0.0).is_err());
        assert!(PenaltyConfig::new(PenaltyKind::Lsp, f64::NAN, 1.0).is_err());
        assert!(ProxProblem::new(1.0, 0.0, cfg(PenaltyKind::Lsp, 1.0, 1.0)).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in PenaltyKind::ALL {
            assert_eq!(kind.name().parse::<PenaltyKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.name()));
        }
        assert!("l1".parse::<PenaltyKind>().is_err());
        let bad = r#"{"kind":"scad","lambda":1.0,"theta":1.5}"#;
        assert!(serde_json::from_str::<PenaltyConfig>(bad).is_err());
    }

    fn solve(kind: PenaltyKind, psi: f64, lambda: f64, theta: f64, rho1: f64) -> f64 {
        prox(&ProxProblem::new(psi, rho1, cfg(kind, lambda, theta)).unwrap()).unwrap()
    }

    // Expected values below were frozen from the grid oracle in `crate::oracle`.
    #[test]
    fn prox_examples() {
        for kind in PenaltyKind::ALL {
            let th = kind.default_theta();
            assert_eq!(solve(kind, 0.0, 0.4, th, 2.0), 0.0);
        }
        assert_eq!(solve(PenaltyKind::Scad, 5.0, 1.0, 3.7, 1.0), 5.0);
        assert_eq!(solve(PenaltyKind::CappedL1, 0.5, 1.0, 2.0, 1.0), 0.0);
        assert_eq!(solve(PenaltyKind::Mcp, 0.2, 1.0, 3.0, 1.0), 0.0);
    }

    #[test]
    fn prox_examples_agree_with_oracle() {
        let cases = [
            (PenaltyKind::Scad, 5.0, 1.0, 3.7, 1.0),
            (PenaltyKind::CappedL1, 0.5, 1.0, 2.0, 1.0),
            (PenaltyKind::Mcp, 0.2, 1.0, 3.0, 1.0),
        ];
        for (kind, psi, lam, th, r) in cases {
            let p = ProxProblem::new(psi, r, cfg(kind, lam, th)).unwrap();
            let z = prox(&p).unwrap();
            let o = prox_oracle_default(&p);
            assert!((z - o).abs() < 1e-5, "{kind}: {z} vs oracle {o}");
        }
    }

    #[test]
    fn scad_middle_branch_off_unit_modulus() {
        // ρ₁ = 4: the stationary point inside (λ, θλ] is
        // (ρ₁a(θ−1) − θλ)/(ρ₁(θ−1) − 1) = (4·2·2.7 − 3.7)/(4·2.7 − 1) = 17.9/9.8.
        let z = solve(PenaltyKind::Scad, 2.0, 1.0, 3.7, 4.0);
        assert!((z - 17.9 / 9.8).abs() < 1e-14, "{z}");
        let p = ProxProblem::new(2.0, 4.0, cfg(PenaltyKind::Scad, 1.0, 3.7)).unwrap();
        assert!((prox_oracle_default(&p) - z).abs() < 1e-6);
    }

    #[test]
    fn mcp_degenerate_theta_one() {
        // θ = 1, ρ₁ = 1: the inner piece is linear; only {0, θλ} remain.
        let c = cfg(PenaltyKind::Mcp, 1.0, 1.0);
        for psi in [0.3, 0.9, 1.0, 1.2, 3.0] {
            let p = ProxProblem::new(psi, 1.0, c).unwrap();
            let z = prox(&p).unwrap();
            let o = prox_oracle_default(&p);
            assert!(
                p.objective(z) <= p.objective(o) + 1e-10,
                "psi={psi}: {z} vs {o}"
            );
        }
    }

    #[test]
    fn prox_vector_is_elementwise() {
        let c = cfg(PenaltyKind::Mcp, 0.5, 3.0);
        assert_eq!(prox_vector(&[0.0; 4], 1.3, &c).unwrap(), vec![0.0; 4]);
        let t = [0.1, -2.0, 0.7, 5.0, -0.6];
        let z = prox_vector(&t, 1.3, &c).unwrap();
        let perm = [3, 0, 4, 1, 2];
        let tp: Vec<f64> = perm.iter().map(|&i| t[i]).collect();
        let zp = prox_vector(&tp, 1.3, &c).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(zp[k], z[i]);
        }
        assert!(prox_vector(&t, -1.0, &c).is_err());
    }

    #[test]
    fn continuity_at_breakpoints() {
        let eps = 1e-8;
        let s = cfg(PenaltyKind::Scad, 0.8, 3.7);
        let m = cfg(PenaltyKind::Mcp, 0.8, 3.0);
        let c = cfg(PenaltyKind::CappedL1, 0.8, 1.5);
        for (pen, knot) in [(s, 0.8), (s, 3.7 * 0.8), (m, 3.0 * 0.8), (c, 1.5)] {
            let gap = (pen.value(knot + eps) - pen.value(knot - eps)).abs();
            assert!(gap < 1e-6, "{:?} at {knot}: {gap}", pen.kind);
        }
    }

    fn arb_problem() -> impl Strategy<Value = ProxProblem> {
        (
            0usize..4,
            -10.0..10.0f64,
            -8.0..2.0f64,
            0.01..10.0f64,
            0.05..6.0f64,
        )
            .prop_map(|(k, psi, log_lam, rho1, theta)| {
                let kind = PenaltyKind::ALL[k];
                let theta = if kind == PenaltyKind::Scad {
                    2.0 + theta
                } else {
                    theta
                };
                ProxProblem::new(psi, rho1, cfg(kind, log_lam.exp2(), theta)).unwrap()
            })
    }

    proptest! {
        #[test]
        fn prox_is_odd(p in arb_problem()) {
            let z = prox(&p).unwrap();
            let neg = ProxProblem { psi: -p.psi, ..p };
            prop_assert_eq!(prox(&neg).unwrap(), -z);
        }

        #[test]
        fn prox_dominates_trivial_points(p in arb_problem()) {
            let z = prox(&p).unwrap();
            prop_assert!(p.objective(z) <= p.objective(p.psi));
            prop_assert!(p.objective(z) <= p.objective(0.0));
            prop_assert!(z.abs() <= p.psi.abs() + 1e-12);
        }

        #[test]
        fn penalty_monotone_in_magnitude(k in 0usize..4, a in 0.0..20.0f64, b in 0.0..20.0f64, lam in 0.01..4.0f64) {
            let kind = PenaltyKind::ALL[k];
            let c = PenaltyConfig::with_default_theta(kind, lam).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(c.value(lo) <= c.value(hi) + 1e-15);
            prop_assert!(c.value(-hi) >= 0.0);
        }
    }
}
