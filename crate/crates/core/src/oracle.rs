//! Brute-force grid minimizers used to validate the closed-form updates.
//!
//! Nothing here shares code with the closed forms: the proximal oracle only
//! evaluates the objective `h` on grids.

use crate::penalty::ProxProblem;

/// Number of points in the coarse grid of [`prox_oracle_default`].
pub const DEFAULT_GRID_POINTS: usize = 100_001;

/// Final grid spacing reached by the refinement rounds.
pub const FINAL_RESOLUTION: f64 = 1e-7;

const REFINE_POINTS: usize = 2001;
const REFINE_CANDIDATES: usize = 3;

/// Minimizes `f` over `[lo, hi]` by a uniform grid followed by local
/// refinement.
///
/// The coarse grid has `points` nodes and always contains `0` when
/// `lo ≤ 0 ≤ hi`. The best few discrete local minima are each refined by
/// repeatedly re-gridding `±2` cells around them until the spacing drops
/// below [`FINAL_RESOLUTION`] (at least two rounds). Returns the best point
/// seen.
pub fn grid_minimize<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, points: usize) -> f64 {
    assert!(hi > lo && points >= 3);
    let step = (hi - lo) / (points - 1) as f64;
    let node = |i: usize| -> f64 {
        if lo < 0.0 && hi > 0.0 {
            // Anchor the lattice at zero so the origin is an exact node.
            let first = (lo / step).ceil();
            (first + i as f64) * step
        } else {
            lo + i as f64 * step
        }
    };
    let count = if lo < 0.0 && hi > 0.0 {
        ((hi / step).floor() - (lo / step).ceil()) as usize + 1
    } else {
        points
    };

    // Streaming pass: keep the lowest few discrete local minima.
    let mut minima: Vec<(f64, usize)> = Vec::with_capacity(REFINE_CANDIDATES + 1);
    let mut prev = f64::INFINITY;
    let mut cur = f(node(0));
    for i in 0..count {
        let next = if i + 1 < count {
            f(node(i + 1))
        } else {
            f64::INFINITY
        };
        if cur <= prev && cur <= next {
            let pos = minima.partition_point(|m| m.0 <= cur);
            if pos < REFINE_CANDIDATES {
                minima.insert(pos, (cur, i));
                minima.truncate(REFINE_CANDIDATES);
            }
        }
        prev = cur;
        cur = next;
    }

    let mut best_x = node(minima[0].1);
    let mut best_v = minima[0].0;
    for &(v0, i) in &minima {
        let mut center = node(i);
        let mut center_v = v0;
        let mut width = step;
        let mut rounds = 0;
        while rounds < 2 || width > FINAL_RESOLUTION {
            let a = (center - 2.0 * width).max(lo);
            let b = (center + 2.0 * width).min(hi);
            let h = (b - a) / (REFINE_POINTS - 1) as f64;
            for j in 0..REFINE_POINTS {
                let x = a + j as f64 * h;
                let v = f(x);
                if v < center_v {
                    center = x;
                    center_v = v;
                }
            }
            width = h;
            rounds += 1;
        }
        if center_v < best_v || (center_v == best_v && center.abs() < best_x.abs()) {
            best_x = center;
            best_v = center_v;
        }
    }
    best_x
}

/// Grid argmin of `h(z) = ½(z − ψ)² + p_λ(z)/ρ₁` on `[−halfwidth, halfwidth]`.
pub fn prox_oracle(p: &ProxProblem, halfwidth: f64, grid_points: usize) -> f64 {
    grid_minimize(|z| p.objective(z), -halfwidth, halfwidth, grid_points)
}

/// Smallest admissible half-width `|ψ| + λ/ρ₁ + θ + 1`.
pub fn oracle_halfwidth(p: &ProxProblem) -> f64 {
    p.psi.abs() + p.penalty.lambda / p.rho1 + p.penalty.theta + 1.0
}

/// [`prox_oracle`] with the minimal half-width and [`DEFAULT_GRID_POINTS`].
pub fn prox_oracle_default(p: &ProxProblem) -> f64 {
    prox_oracle(p, oracle_halfwidth(p), DEFAULT_GRID_POINTS)
}
