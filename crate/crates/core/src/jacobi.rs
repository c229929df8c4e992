//! One-sided Jacobi SVD and two-sided (cyclic) Jacobi symmetric eigensolver.
//!
//! Both kernels visit pivot pairs in cyclic-by-rows order and use relative
//! stopping criteria, which is what gives their results high relative
//! accuracy: the one-sided method stops when `|gᵢᵀgⱼ| ≤ τ‖gᵢ‖‖gⱼ‖`, the
//! two-sided one when `|mᵢⱼ| ≤ τ√(mᵢᵢmⱼⱼ)`, with `τ = tol·n·u` for the unit
//! roundoff `u` of the scalar type.

use crate::error::{Error, Result};
use crate::kernels::nrm2;
use crate::matrix::Matrix;
use crate::precision::{Precision, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiConfig {
    /// Multiplier on `n·u`; the stopping threshold is `tol·n·u`.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl Default for JacobiConfig {
    fn default() -> Self {
        JacobiConfig {
            tol: 1.0,
            max_sweeps: 30,
        }
    }
}

impl JacobiConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidArgument(
                "max_sweeps must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Stopping threshold `tol·n·u` for an `n`-column problem in `T`.
    pub fn threshold<T: Real>(&self, n: usize) -> T {
        T::from_f64_rne(self.tol * n as f64 * T::UNIT_ROUNDOFF)
    }
}

/// Iteration counters of a Jacobi run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct JacobiStats {
    /// Sweeps performed, including the final sweep that detected convergence.
    pub sweeps: usize,
    /// Rotations actually applied.
    pub rotations: usize,
    /// Pivot pairs visited in each sweep, always `n(n−1)/2`.
    pub pairs_per_sweep: usize,
}

/// Thin SVD `G = U·diag(σ)·Vᵀ` with `σ` descending.
#[derive(Debug, Clone)]
pub struct SvdFactors<T> {
    pub u: Matrix<T>,
    pub sigma: Vec<T>,
    pub v: Matrix<T>,
    pub stats: JacobiStats,
}

impl<T: Real> SvdFactors<T> {
    pub fn precision(&self) -> Precision {
        T::PRECISION
    }
}

/// Spectral decomposition `M = V·diag(λ)·Vᵀ` with `λ` descending.
#[derive(Debug, Clone)]
pub struct EigFactors<T> {
    pub v: Matrix<T>,
    pub lambda: Vec<T>,
    pub stats: JacobiStats,
}

impl<T: Real> EigFactors<T> {
    pub fn precision(&self) -> Precision {
        T::PRECISION
    }
}

/// Rotation tangent that zeroes the off-diagonal of `[[a, c], [c, b]]`
/// (smaller of the two angles).
#[inline]
fn rotation<T: Real>(a: T, b: T, c: T) -> (T, T) {
    let two = T::one() + T::one();
    let zeta = (b - a) / (two * c);
    let t = zeta.signum() / (zeta.abs() + T::one().hypot(zeta));
    let cs = T::one() / T::one().hypot(t);
    (cs, cs * t)
}

#[inline]
fn rotate_cols<T: Real>(x: &mut [T], y: &mut [T], c: T, s: T) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let (p, q) = (*xi, *yi);
        *xi = c * p - s * q;
        *yi = s * p + c * q;
    }
}

/// Flips columns of `v` so that each column's largest-magnitude entry (first
/// one on ties) is nonnegative, applying the same flips to `u`.
pub fn normalize_signs<T: Real>(v: &mut Matrix<T>, mut u: Option<&mut Matrix<T>>) {
    for j in 0..v.cols() {
        let col = v.col(j);
        let mut best = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < T::zero() {
            v.col_mut(j).iter_mut().for_each(|x| *x = -*x);
            if let Some(u) = u.as_deref_mut() {
                u.col_mut(j).iter_mut().for_each(|x| *x = -*x);
            }
        }
    }
}

/// Stable descending order of `keys`.
fn descending_order<T: Real>(keys: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[b].partial_cmp(&keys[a]).expect("finite keys"));
    order
}

fn permute_cols<T: Real>(a: &Matrix<T>, order: &[usize]) -> Matrix<T> {
    let mut data = Vec::with_capacity(a.rows() * order.len());
    for &j in order {
        data.extend_from_slice(a.col(j));
    }
    Matrix::from_raw(a.rows(), order.len(), data)
}

/// One-sided Jacobi SVD of a full column rank `m × n` matrix, `m ≥ n`.
pub fn onesided_jacobi_svd<T: Real>(a: &Matrix<T>, cfg: &JacobiConfig) -> Result<SvdFactors<T>> {
    cfg.validate()?;
    let (m, n) = a.shape();
    if m < n || n == 0 {
        return Err(Error::Shape(format!(
            "one-sided Jacobi needs m >= n >= 1, got {m}x{n}"
        )));
    }
    let thresh: T = cfg.threshold(n);
    let mut g = a.clone();
    let mut v = Matrix::identity(n);
    for j in 0..n {
        if g.col(j).iter().all(|&x| x == T::zero()) {
            return Err(Error::ZeroColumn(j));
        }
    }

    let mut stats = JacobiStats {
        pairs_per_sweep: n * (n - 1) / 2,
        ..Default::default()
    };
    let mut converged = false;
    while stats.sweeps < cfg.max_sweeps {
        stats.sweeps += 1;
        let mut rotated = false;
        for i in 0..n.saturating_sub(1) {
            for j in i + 1..n {
                let (gi, gj) = g.col_pair_mut(i, j);
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for (&x, &y) in gi.iter().zip(gj.iter()) {
                    alpha = alpha + x * x;
                    beta = beta + y * y;
                    gamma = gamma + x * y;
                }
                if gamma.abs() <= thresh * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                let (c, s) = rotation(alpha, beta, gamma);
                rotate_cols(gi, gj, c, s);
                let (vi, vj) = v.col_pair_mut(i, j);
                rotate_cols(vi, vj, c, s);
                stats.rotations += 1;
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        let off = max_column_coupling(&g);
        if off > thresh.as_f64() {
            return Err(Error::NoConvergence {
                sweeps: stats.sweeps,
                off,
            });
        }
    }

    let mut sigma = Vec::with_capacity(n);
    for j in 0..n {
        let s = nrm2(g.col(j));
        if s == T::zero() {
            return Err(Error::ZeroColumn(j));
        }
        g.col_mut(j).iter_mut().for_each(|x| *x = *x / s);
        sigma.push(s);
    }
    let order = descending_order(&sigma);
    let mut u = permute_cols(&g, &order);
    let mut v = permute_cols(&v, &order);
    let sigma = order.iter().map(|&k| sigma[k]).collect();
    normalize_signs(&mut v, Some(&mut u));
    Ok(SvdFactors { u, sigma, v, stats })
}

/// Largest `|gᵢᵀgⱼ|/(‖gᵢ‖‖gⱼ‖)` over column pairs.
fn max_column_coupling<T: Real>(g: &Matrix<T>) -> f64 {
    let n = g.cols();
    let norms: Vec<f64> = (0..n).map(|j| nrm2(g.col(j)).as_f64()).collect();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let d: f64 = g
                .col(i)
                .iter()
                .zip(g.col(j))
                .map(|(x, y)| x.as_f64() * y.as_f64())
                .sum();
            worst = worst.max(d.abs() / (norms[i] * norms[j]));
        }
    }
    worst
}

/// Two-sided cyclic Jacobi eigensolver for a symmetric positive definite
/// matrix. Only symmetric input is meaningful; the full matrix is updated.
pub fn twosided_jacobi_eig<T: Real>(m: &Matrix<T>, cfg: &JacobiConfig) -> Result<EigFactors<T>> {
    cfg.validate()?;
    let n = m.rows();
    if m.cols() != n || n == 0 {
        return Err(Error::Shape(format!(
            "eigensolver needs a square matrix, got {}x{}",
            n,
            m.cols()
        )));
    }
    let thresh: T = cfg.threshold(n);
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let mut stats = JacobiStats {
        pairs_per_sweep: n * (n - 1) / 2,
        ..Default::default()
    };
    for k in 0..n {
        if !(a[(k, k)] > T::zero()) {
            return Err(Error::NotPositiveDefinite { pivot: k + 1 });
        }
    }

    let mut converged = false;
    while stats.sweeps < cfg.max_sweeps {
        stats.sweeps += 1;
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let (app, aqq) = (a[(p, p)], a[(q, q)]);
                if !(app > T::zero()) {
                    return Err(Error::NotPositiveDefinite { pivot: p + 1 });
                }
                if !(aqq > T::zero()) {
                    return Err(Error::NotPositiveDefinite { pivot: q + 1 });
                }
                if apq.abs() <= thresh * app.sqrt() * aqq.sqrt() {
                    continue;
                }
                let (c, s) = rotation(app, aqq, apq);
                let t = s / c;
                {
                    let (cp, cq) = a.col_pair_mut(p, q);
                    rotate_cols(cp, cq, c, s);
                }
                for r in 0..n {
                    if r != p && r != q {
                        a[(p, r)] = a[(r, p)];
                        a[(q, r)] = a[(r, q)];
                    }
                }
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                let (vp, vq) = v.col_pair_mut(p, q);
                rotate_cols(vp, vq, c, s);
                stats.rotations += 1;
                rotated = true;
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let d = (a[(p, p)].as_f64() * a[(q, q)].as_f64()).sqrt();
                off = off.max(a[(p, q)].as_f64().abs() / d);
            }
        }
        if off > thresh.as_f64() {
            return Err(Error::NoConvergence {
                sweeps: stats.sweeps,
                off,
            });
        }
    }

    let diag: Vec<T> = (0..n).map(|k| a[(k, k)]).collect();
    if let Some(k) = diag.iter().position(|&x| !(x > T::zero())) {
        return Err(Error::NotPositiveDefinite { pivot: k + 1 });
    }
    let order = descending_order(&diag);
    let mut v = permute_cols(&v, &order);
    let lambda = order.iter().map(|&k| diag[k]).collect();
    normalize_signs(&mut v, None);
    Ok(EigFactors { v, lambda, stats })
}
