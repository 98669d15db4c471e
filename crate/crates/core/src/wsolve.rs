//! The w-subproblem: solve `(ρ I_d + HᵀH) w = f` with `ρ = ρ₁/ρ₂`, `H = Y X`.
//!
//! The system matrix never changes during a run, so one Cholesky factor is
//! built up front and reused by every iteration.
//!
//! * `n ≥ d` ([`Branch::TallData`]): factor `C = ρ I_d + HᵀH` (d×d) and
//!   back-solve, `O(d²)` per call.
//! * `d > n` ([`Branch::WideData`]): factor `C = I_n + HHᵀ/ρ` (n×n) and use
//!   the identity `(ρI + HᵀH)⁻¹ f = f/ρ − Hᵀ C⁻¹ (H f)/ρ²`, `O(dn)` per call.
//!
//! Because `yᵢ² = 1`, `HᵀH = XᵀX` and `(HHᵀ)ᵢⱼ = yᵢ yⱼ xᵢ·xⱼ`; both Gram
//! matrices are accumulated straight from the sparse rows of `X`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Default cap on the dimension of the dense factorized system.
pub const DEFAULT_MAX_DENSE_DIM: usize = 20_000;

/// Relative diagonal shift applied once when the first factorization fails.
const JITTER: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `n ≥ d`: d×d factorization of `ρI + HᵀH`.
    TallData,
    /// `d > n`: n×n factorization of `I + HHᵀ/ρ`.
    WideData,
}

impl Branch {
    pub fn for_shape(n: usize, d: usize) -> Self {
        if n >= d {
            Branch::TallData
        } else {
            Branch::WideData
        }
    }
}

/// Matrix-free view of `H = Y X`.
#[derive(Debug, Clone, Copy)]
pub struct HOperator<'a> {
    ds: &'a Dataset,
}

impl<'a> HOperator<'a> {
    pub fn new(ds: &'a Dataset) -> Self {
        Self { ds }
    }

    pub fn n(&self) -> usize {
        self.ds.n_samples()
    }

    pub fn d(&self) -> usize {
        self.ds.n_features()
    }

    pub fn labels(&self) -> &'a [f64] {
        self.ds.labels()
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.ds
    }

    /// `out = H x`
    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let xm = self.ds.features();
        for ((o, &y), r) in out.iter_mut().zip(self.ds.labels()).zip(0..) {
            *o = y * xm.row(r).dot(x);
        }
    }

    /// `out = Hᵀ r`
    pub fn apply_transpose(&self, r: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let xm = self.ds.features();
        for (i, (&ri, &y)) in r.iter().zip(self.ds.labels()).enumerate() {
            let scale = ri * y;
            if scale == 0.0 {
                continue;
            }
            for (j, v) in xm.row(i).iter() {
                out[j] += v * scale;
            }
        }
    }
}

/// Options for [`build_cache_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheOptions {
    /// Overrides the `n ≥ d` rule. Both branches solve the same system.
    pub force_branch: Option<Branch>,
    /// Largest allowed dimension of the dense factorized matrix.
    pub max_dense_dim: usize,
}

impl Default for CacheOptions {
    fn default() -> Self {
        Self {
            force_branch: None,
            max_dense_dim: DEFAULT_MAX_DENSE_DIM,
        }
    }
}

/// Cholesky factor `C = L Lᵀ` of the branch's system matrix.
#[derive(Debug, Clone)]
pub struct FactorCache {
    branch: Branch,
    chol: Cholesky<f64, Dyn>,
    rho: f64,
    n: usize,
    d: usize,
    diagonal_shift: f64,
}

impl FactorCache {
    pub fn branch(&self) -> Branch {
        self.branch
    }

    /// `ρ = ρ₁/ρ₂`
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// `(n, d)` of the dataset the cache was built from.
    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.d)
    }

    /// Diagonal shift that was needed to factor `C` (zero normally).
    pub fn diagonal_shift(&self) -> f64 {
        self.diagonal_shift
    }

    /// Lower-triangular factor `L`.
    pub fn factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// Solves `(ρI + HᵀH) w = f`.
    pub fn solve_w(&self, h: &HOperator<'_>, f: &[f64]) -> Result<Vec<f64>> {
        let mut w = vec![0.0; self.d];
        self.solve_w_into(h, f, &mut w)?;
        Ok(w)
    }

    pub fn solve_w_into(&self, h: &HOperator<'_>, f: &[f64], w: &mut [f64]) -> Result<()> {
        if h.n() != self.n || h.d() != self.d {
            return Err(Error::Dimension(format!(
                "cache built for {}x{}, operator is {}x{}",
                self.n,
                self.d,
                h.n(),
                h.d()
            )));
        }
        if f.len() != self.d || w.len() != self.d {
            return Err(Error::Dimension(format!(
                "right-hand side has length {}, expected {}",
                f.len(),
                self.d
            )));
        }
        match self.branch {
            Branch::TallData => {
                let mut rhs = DVector::from_column_slice(f);
                self.chol.solve_mut(&mut rhs);
                w.copy_from_slice(rhs.as_slice());
            }
            Branch::WideData => {
                let mut hf = DVector::zeros(self.n);
                h.apply(f, hf.as_mut_slice());
                self.chol.solve_mut(&mut hf);
                h.apply_transpose(hf.as_slice(), w);
                let (inv, inv2) = (1.0 / self.rho, 1.0 / (self.rho * self.rho));
                for (wj, &fj) in w.iter_mut().zip(f) {
                    *wj = fj * inv - *wj * inv2;
                }
            }
        }
        Ok(())
    }
}

/// Builds the cache with the `n ≥ d` branch rule.
pub fn build_cache(ds: &Dataset, rho1: f64, rho2: f64) -> Result<FactorCache> {
    build_cache_with(ds, rho1, rho2, &CacheOptions::default())
}

pub fn build_cache_with(
    ds: &Dataset,
    rho1: f64,
    rho2: f64,
    opts: &CacheOptions,
) -> Result<FactorCache> {
    check_rho(rho1, rho2)?;
    let (n, d) = (ds.n_samples(), ds.n_features());
    let branch = opts.force_branch.unwrap_or_else(|| Branch::for_shape(n, d));
    let rho = rho1 / rho2;
    let dim = match branch {
        Branch::TallData => d,
        Branch::WideData => n,
    };
    if dim > opts.max_dense_dim {
        return Err(Error::TooLarge {
            dim,
            cap: opts.max_dense_dim,
        });
    }
    let c = system_matrix(ds, branch, rho);
    let (chol, diagonal_shift) = factor_with_retry(c)?;
    Ok(FactorCache {
        branch,
        chol,
        rho,
        n,
        d,
        diagonal_shift,
    })
}

/// `ρI + XᵀX` for TallData or `I + HHᵀ/ρ` for WideData.
pub fn system_matrix(ds: &Dataset, branch: Branch, rho: f64) -> DMatrix<f64> {
    match branch {
        Branch::TallData => {
            let mut c = gram_xtx(ds);
            for j in 0..c.nrows() {
                c[(j, j)] += rho;
            }
            c
        }
        Branch::WideData => {
            let mut c = gram_hht(ds);
            c /= rho;
            for i in 0..c.nrows() {
                c[(i, i)] += 1.0;
            }
            c
        }
    }
}

fn check_rho(rho1: f64, rho2: f64) -> Result<()> {
    if !(rho1 > 0.0 && rho1.is_finite() && rho2 > 0.0 && rho2.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "rho1 and rho2 must be positive and finite, got {rho1} and {rho2}"
        )));
    }
    Ok(())
}

fn factor_with_retry(c: DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let dim = c.nrows();
    let shift = JITTER * c.trace() / dim.max(1) as f64;
    if let Some(chol) = Cholesky::new(c.clone()) {
        return Ok((chol, 0.0));
    }
    let mut shifted = c;
    for i in 0..dim {
        shifted[(i, i)] += shift;
    }
    Cholesky::new(shifted)
        .map(|chol| (chol, shift))
        .ok_or(Error::Factorization { dim, shift })
}

/// `XᵀX` (= `HᵀH`), accumulated as a sum of sparse row outer products.
pub fn gram_xtx(ds: &Dataset) -> DMatrix<f64> {
    let d = ds.n_features();
    let mut g = vec![0.0; d * d];
    for row in ds.features().rows() {
        // Lower triangle of the column-major buffer: entry (a, b) with a ≥ b.
        for (p, (&b, &vb)) in row.indices.iter().zip(row.values).enumerate() {
            let col = &mut g[b * d..(b + 1) * d];
            for (&a, &va) in row.indices[p..].iter().zip(&row.values[p..]) {
                col[a] += va * vb;
            }
        }
    }
    let mut m = DMatrix::from_vec(d, d, g);
    m.fill_upper_triangle_with_lower_triangle();
    m
}

/// `HHᵀ` with `(HHᵀ)ᵢⱼ = yᵢ yⱼ xᵢ·xⱼ`.
pub fn gram_hht(ds: &Dataset) -> DMatrix<f64> {
    let n = ds.n_samples();
    let x = ds.features();
    let y = ds.labels();
    let mut g = DMatrix::zeros(n, n);
    let mut dense_row = vec![0.0; ds.n_features()];
    for i in 0..n {
        let ri = x.row(i);
        for (j, v) in ri.iter() {
            dense_row[j] = v;
        }
        for k in i..n {
            let s = y[i] * y[k] * x.row(k).dot(&dense_row);
            g[(k, i)] = s;
            g[(i, k)] = s;
        }
        for &j in ri.indices {
            dense_row[j] = 0.0;
        }
    }
    g
}

/// `f = ρ(z − u) + Hᵀ(s + 1 − ξ − v − b y)`
#[allow(clippy::too_many_arguments)]
pub fn assemble_f(
    z: &[f64],
    u: &[f64],
    s: &[f64],
    xi: &[f64],
    v: &[f64],
    b: f64,
    h: &HOperator<'_>,
    rho: f64,
) -> Result<Vec<f64>> {
    let (n, d) = (h.n(), h.d());
    if z.len() != d || u.len() != d {
        return Err(Error::Dimension(format!(
            "z and u must have length {d}, got {} and {}",
            z.len(),
            u.len()
        )));
    }
    if s.len() != n || xi.len() != n || v.len() != n {
        return Err(Error::Dimension(format!(
            "s, xi and v must have length {n}, got {}, {} and {}",
            s.len(),
            xi.len(),
            v.len()
        )));
    }
    let y = h.labels();
    let r: Vec<f64> = (0..n)
        .map(|i| s[i] + 1.0 - xi[i] - v[i] - b * y[i])
        .collect();
    let mut f = vec![0.0; d];
    h.apply_transpose(&r, &mut f);
    for j in 0..d {
        f[j] += rho * (z[j] - u[j]);
    }
    Ok(f)
}

/// Reference w-update: materializes `H` densely, forms
/// `ρ₁I + ρ₂HᵀH` by dense products and solves by LU with partial pivoting.
///
/// `f_unscaled = ρ₁(z − u) + ρ₂Hᵀ(s + 1 − ξ − v − b y)`, i.e. `ρ₂ f`.
pub fn solve_w_naive(ds: &Dataset, rho1: f64, rho2: f64, f_unscaled: &[f64]) -> Result<Vec<f64>> {
    check_rho(rho1, rho2)?;
    let d = ds.n_features();
    if f_unscaled.len() != d {
        return Err(Error::Dimension(format!(
            "right-hand side has length {}, expected {d}",
            f_unscaled.len()
        )));
    }
    let mut h = ds.features().to_dense();
    for (i, &y) in ds.labels().iter().enumerate() {
        h.row_mut(i).scale_mut(y);
    }
    let mut a = h.tr_mul(&h) * rho2;
    for j in 0..d {
        a[(j, j)] += rho1;
    }
    let rhs = DVector::from_column_slice(f_unscaled);
    let w = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular(format!("{d}x{d} LU solve failed")))?;
    Ok(w.as_slice().to_vec())
}
