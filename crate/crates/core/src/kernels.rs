//! Basic dense kernels: Gram product, Cholesky, norms, column scaling,
//! matrix product and Householder QR.
//!
//! Every accumulation runs in the matrix's own scalar type with a fixed
//! ascending summation order, so results are reproducible bit for bit.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::matrix::{Diag, Matrix};
use crate::precision::Real;

/// Rows per cache block in the Gram and product kernels.
const ROW_BLOCK: usize = 256;

/// `AᵀA`, exactly symmetric.
///
/// The upper triangle is accumulated with ascending row index and mirrored.
pub fn gram<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    gram_rows(a, 0..a.rows())
}

/// `A(rows, :)ᵀ A(rows, :)` for a contiguous row range.
pub fn gram_rows<T: Real>(a: &Matrix<T>, rows: Range<usize>) -> Matrix<T> {
    let n = a.cols();
    let mut acc = vec![T::zero(); n * n];
    let mut buf = vec![T::zero(); ROW_BLOCK * n];
    let mut start = rows.start;
    while start < rows.end {
        let end = (start + ROW_BLOCK).min(rows.end);
        let len = end - start;
        // transpose the block to row-major so each rank-1 update is contiguous
        for j in 0..n {
            for (r, &x) in a.col(j)[start..end].iter().enumerate() {
                buf[r * n + j] = x;
            }
        }
        for r in 0..len {
            let row = &buf[r * n..(r + 1) * n];
            for i in 0..n {
                let x = row[i];
                let dst = &mut acc[i * n + i..(i + 1) * n];
                for (d, &y) in dst.iter_mut().zip(&row[i..]) {
                    *d = *d + x * y;
                }
            }
        }
        start = end;
    }
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = acc[i * n + j];
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Upper-triangular `R` with `RᵀR = M`, right-looking and unblocked.
///
/// Only the upper triangle of `M` is read.
pub fn cholesky<T: Real>(m: &Matrix<T>) -> Result<Matrix<T>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::Shape(format!(
            "cholesky of a {n}x{} matrix",
            m.cols()
        )));
    }
    let mut r = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            r[(i, j)] = m[(i, j)];
        }
    }
    for k in 0..n {
        let pivot = r[(k, k)];
        if !(pivot > T::zero()) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: k + 1 });
        }
        let rkk = pivot.sqrt();
        r[(k, k)] = rkk;
        for j in k + 1..n {
            r[(k, j)] = r[(k, j)] / rkk;
        }
        for j in k + 1..n {
            let rkj = r[(k, j)];
            for i in k + 1..=j {
                r[(i, j)] = r[(i, j)] - r[(k, i)] * rkj;
            }
        }
    }
    Ok(r)
}

/// Euclidean norm with scaled one-pass accumulation (no overflow of squares).
pub fn nrm2<T: Real>(x: &[T]) -> T {
    let mut scale = T::zero();
    let mut ssq = T::one();
    for &v in x {
        if v != T::zero() {
            let a = v.abs();
            if scale < a {
                let q = scale / a;
                ssq = T::one() + ssq * q * q;
                scale = a;
            } else {
                let q = a / scale;
                ssq = ssq + q * q;
            }
        }
    }
    scale * ssq.sqrt()
}

/// Column 2-norms as a diagonal matrix.
pub fn col_norms<T: Real>(a: &Matrix<T>) -> Result<Diag<T>> {
    let mut out = Vec::with_capacity(a.cols());
    for j in 0..a.cols() {
        let s = nrm2(a.col(j));
        if s == T::zero() {
            return Err(Error::ZeroColumn(j));
        }
        out.push(s);
    }
    Ok(Diag::new(out))
}

/// Multiplies column `j` by `s_j`, or divides by it when `invert` is set.
pub fn scale_columns<T: Real>(a: &Matrix<T>, s: &Diag<T>, invert: bool) -> Result<Matrix<T>> {
    if s.len() != a.cols() {
        return Err(Error::Shape(format!(
            "{} scale factors for {} columns",
            s.len(),
            a.cols()
        )));
    }
    let mut out = a.clone();
    for (j, &f) in s.entries().iter().enumerate() {
        if invert {
            if f == T::zero() {
                return Err(Error::ZeroScale(j));
            }
            out.col_mut(j).iter_mut().for_each(|x| *x = *x / f);
        } else {
            out.col_mut(j).iter_mut().for_each(|x| *x = *x * f);
        }
    }
    Ok(out)
}

/// `‖QᵀQ − I‖_F`, accumulated in binary64 whatever the precision of `Q`.
pub fn orth_error<T: Real>(q: &Matrix<T>) -> f64 {
    let qh: Matrix<f64> = q.cast().expect("widening never overflows");
    let g = gram(&qh);
    let n = g.rows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            let d = g[(i, j)] - if i == j { 1.0 } else { 0.0 };
            s += d * d;
        }
    }
    s.sqrt()
}

#[inline]
pub(crate) fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).fold(T::zero(), |s, (&a, &b)| s + a * b)
}

#[inline]
pub(crate) fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

/// `A·B` with the inner index summed in ascending order. Shapes are checked
/// by [`Matrix::matmul`].
pub(crate) fn matmul<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let (m, k) = a.shape();
    let n = b.cols();
    let mut c = Matrix::zeros(m, n);
    let mut start = 0;
    while start < m {
        let end = (start + ROW_BLOCK).min(m);
        for j in 0..n {
            let mut acc = vec![T::zero(); end - start];
            for l in 0..k {
                axpy(b[(l, j)], &a.col(l)[start..end], &mut acc);
            }
            c.col_mut(j)[start..end].copy_from_slice(&acc);
        }
        start = end;
    }
    c
}

/// Thin Householder QR: `A = QR` with `Q` `m × n` (explicitly formed) and `R`
/// `n × n` upper triangular. `R`'s diagonal may carry either sign.
pub fn householder_qr<T: Real>(a: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::Shape(format!("QR needs rows >= cols, got {m}x{n}")));
    }
    let mut w = a.clone();
    let mut reflectors: Vec<(Vec<T>, T)> = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    let two = T::one() + T::one();
    for k in 0..n {
        let x = &w.col(k)[k..];
        let norm = nrm2(x);
        if x[1..].iter().all(|&t| t == T::zero()) {
            // already reduced: identity reflector
            reflectors.push((Vec::new(), T::zero()));
            diag.push(x[0]);
            continue;
        }
        let alpha = if x[0] >= T::zero() { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] = v[0] - alpha;
        let vnorm = nrm2(&v);
        let beta = two / (vnorm * vnorm);
        for j in k + 1..n {
            let cj = &mut w.col_mut(j)[k..];
            let s = beta * dot(&v, cj);
            axpy(-s, &v, cj);
        }
        diag.push(alpha);
        reflectors.push((v, beta));
    }
    let mut r = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            r[(i, j)] = w[(i, j)];
        }
        r[(j, j)] = diag[j];
    }
    let mut q = Matrix::eye(m, n);
    for k in (0..n).rev() {
        let (v, beta) = &reflectors[k];
        if *beta == T::zero() {
            continue;
        }
        for j in k..n {
            let cj = &mut q.col_mut(j)[k..];
            let s = *beta * dot(v, cj);
            axpy(-s, v, cj);
        }
    }
    Ok((q, r))
}

/// `R` factor of Householder QR with column pivoting, `A·P = Q·R`. At each
/// step the trailing column of largest norm is moved forward (lowest index
/// on ties). Returns `R` and `perm`, where column `j` of `A·P` is column
/// `perm[j]` of `A`. `Q` is not formed.
pub fn pivoted_qr_r<T: Real>(a: &Matrix<T>) -> Result<(Matrix<T>, Vec<usize>)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::Shape(format!("QR needs rows >= cols, got {m}x{n}")));
    }
    let mut w = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut diag = Vec::with_capacity(n);
    let two = T::one() + T::one();
    for k in 0..n {
        let mut best = k;
        let mut best_norm = nrm2(&w.col(k)[k..]);
        for j in k + 1..n {
            let nj = nrm2(&w.col(j)[k..]);
            if nj > best_norm {
                best = j;
                best_norm = nj;
            }
        }
        if best != k {
            w.swap_cols(k, best);
            perm.swap(k, best);
        }
        let x = &w.col(k)[k..];
        if x[1..].iter().all(|&t| t == T::zero()) {
            diag.push(x[0]);
            continue;
        }
        let alpha = if x[0] >= T::zero() {
            -best_norm
        } else {
            best_norm
        };
        let mut v = x.to_vec();
        v[0] = v[0] - alpha;
        let vnorm = nrm2(&v);
        let beta = two / (vnorm * vnorm);
        for j in k + 1..n {
            let cj = &mut w.col_mut(j)[k..];
            let s = beta * dot(&v, cj);
            axpy(-s, &v, cj);
        }
        diag.push(alpha);
    }
    let mut r = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            r[(i, j)] = w[(i, j)];
        }
        r[(j, j)] = diag[j];
    }
    Ok((r, perm))
}
