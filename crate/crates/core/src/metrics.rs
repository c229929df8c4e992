//! Accuracy measurements and the theoretical error bounds they are checked
//! against.
//!
//! All measurements are evaluated in binary64.

use crate::error::{Error, Result};
use crate::jacobi::{onesided_jacobi_svd, JacobiConfig, SvdFactors};
use crate::kernels::orth_error;
use crate::matrix::Matrix;
use crate::precision::Real;
use crate::thinsvd::EigensolverChoice;

/// Rounding-error constants of the individual algorithm steps.
///
/// `*_h` constants belong to steps run in the higher precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    /// Unit roundoff of the working precision.
    pub u: f64,
    /// Gram product.
    pub eps_m_h: f64,
    /// Backward error of the eigensolver.
    pub eps_eig_h: f64,
    /// Eigensolver stopping tolerance.
    pub eps_eigtol: f64,
    /// Square root and rounding of the singular values.
    pub eps_sqrt: f64,
    /// Rounding of `V` to the working precision.
    pub eps_v: f64,
    /// Forming `U = A V Σ⁻¹`.
    pub eps_u: f64,
    /// Cholesky factorization.
    pub eps_chol_h: f64,
    /// Columnwise backward error of the working precision SVD of `R`.
    pub eps_svd: f64,
}

impl BoundParams {
    /// Defaults for an `n`-column problem with unit roundoffs `u`, `u_h`:
    /// `n·u_h` for the higher precision steps, `n·u` for the working precision
    /// steps and `n²·u` for the working precision SVD.
    pub fn defaults(n: usize, u: f64, u_h: f64) -> Self {
        let nf = n as f64;
        BoundParams {
            u,
            eps_m_h: nf * u_h,
            eps_eig_h: nf * u_h,
            eps_eigtol: nf * u,
            eps_sqrt: nf * u,
            eps_v: nf * u,
            eps_u: nf * u,
            eps_chol_h: nf * u_h,
            eps_svd: nf * nf * u,
        }
    }

    /// Defaults for binary32 working and binary64 higher precision.
    pub fn single_double(n: usize) -> Self {
        Self::defaults(n, f32::UNIT_ROUNDOFF, f64::UNIT_ROUNDOFF)
    }

    pub fn zero() -> Self {
        BoundParams {
            u: 0.0,
            eps_m_h: 0.0,
            eps_eig_h: 0.0,
            eps_eigtol: 0.0,
            eps_sqrt: 0.0,
            eps_v: 0.0,
            eps_u: 0.0,
            eps_chol_h: 0.0,
            eps_svd: 0.0,
        }
    }
}

/// Evaluated theoretical bounds for one problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalBounds {
    /// Relative error of every computed singular value.
    pub sv: f64,
    /// `‖UᵀU − I‖_F`.
    pub orth: f64,
    /// Rowwise relative backward error.
    pub backward: f64,
    /// The quantity that must not exceed 1/2 for `sv` and `orth` to hold.
    pub eps1: f64,
    pub assumption_holds: bool,
}

/// Evaluates the backward, singular value and orthogonality bounds of the
/// Gram-based thin SVD for an `n`-column problem with `κ(B) = kappa_b`.
///
/// For [`EigensolverChoice::GramCholSvd`] the eigensolver constants are
/// first derived from the Cholesky and SVD constants:
/// `ε_eig = 2n(1+nε_M)ε_chol`, `ε_eig-tol = 12(1+nε_M)(u+(1+u)ε_SVD)κ(B)`,
/// `ε_sqrt = 0`.
pub fn theoretical_bounds(
    bp: &BoundParams,
    n: usize,
    kappa_b: f64,
    variant: EigensolverChoice,
) -> TheoreticalBounds {
    let nf = n as f64;
    let (eps_eig, eps_eigtol, eps_sqrt) = match variant {
        EigensolverChoice::GramCholSvd => {
            let growth = 1.0 + nf * bp.eps_m_h;
            (
                2.0 * nf * growth * bp.eps_chol_h,
                12.0 * growth * (bp.u + (1.0 + bp.u) * bp.eps_svd) * kappa_b,
                0.0,
            )
        }
        EigensolverChoice::TwoSidedJacobi | EigensolverChoice::OneSidedJacobiOnGram => {
            (bp.eps_eig_h, bp.eps_eigtol, bp.eps_sqrt)
        }
    };
    let vu = bp.eps_v + bp.eps_u * (1.0 + bp.eps_v);
    let k2 = kappa_b * kappa_b;
    let gram_term = (nf * nf * bp.eps_m_h + eps_eig) * k2;
    let eps1 = 2.0 * eps_eigtol + 2.0 * gram_term + 4.0 * nf * nf.sqrt() * vu * kappa_b;
    let sv = 2.0 * eps_sqrt + 2.0 * eps_eigtol + 4.0 * gram_term;
    let orth = (2.0 * nf.sqrt() * eps_sqrt + nf * eps1) / (1.0 - 2.0 * eps_sqrt);
    TheoreticalBounds {
        sv,
        orth,
        backward: nf.sqrt() * vu,
        eps1,
        assumption_holds: eps1 <= 0.5 && 2.0 * eps_sqrt < 1.0,
    }
}

/// `maxᵢ |computedᵢ − referenceᵢ| / referenceᵢ`.
pub fn max_rel_sv_error<S: Real, R: Real>(computed: &[S], reference: &[R]) -> Result<f64> {
    if computed.len() != reference.len() {
        return Err(Error::Shape(format!(
            "{} computed vs {} reference values",
            computed.len(),
            reference.len()
        )));
    }
    let mut worst = 0.0f64;
    for (i, (&c, &r)) in computed.iter().zip(reference).enumerate() {
        let r = r.as_f64();
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "reference value {i} is not positive"
            )));
        }
        worst = worst.max((c.as_f64() - r).abs() / r);
    }
    Ok(worst)
}

/// Rowwise backward error of a factorization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowwiseBackward {
    /// `maxᵢ ‖(U·diag(σ)·Vᵀ − A)(i,:)‖ / ‖A(i,:)‖` over nonzero rows.
    pub max: f64,
    /// Zero rows of `A`, excluded from the maximum.
    pub zero_rows: usize,
}

/// Residual `U·diag(σ)·Vᵀ − A` formed in binary64, row by row.
pub fn rowwise_backward_error<T: Real>(
    a: &Matrix<T>,
    u: &Matrix<T>,
    sigma: &[T],
    v: &Matrix<T>,
) -> Result<RowwiseBackward> {
    let (m, n) = a.shape();
    let k = sigma.len();
    if u.shape() != (m, k) || v.shape() != (n, k) {
        return Err(Error::Shape(format!(
            "A {m}x{n}, U {}x{}, {k} singular values, V {}x{}",
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols()
        )));
    }
    // W = diag(σ)·Vᵀ, k × n
    let w: Vec<f64> = (0..n)
        .flat_map(|j| (0..k).map(move |l| (j, l)))
        .map(|(j, l)| sigma[l].as_f64() * v[(j, l)].as_f64())
        .collect();
    let mut worst = 0.0f64;
    let mut zero_rows = 0;
    let mut urow = vec![0.0f64; k];
    for i in 0..m {
        for (l, x) in urow.iter_mut().enumerate() {
            *x = u[(i, l)].as_f64();
        }
        let (mut res, mut nrm) = (0.0f64, 0.0f64);
        for j in 0..n {
            let aij = a[(i, j)].as_f64();
            let rec: f64 = urow
                .iter()
                .zip(&w[j * k..(j + 1) * k])
                .map(|(x, y)| x * y)
                .sum();
            res += (rec - aij) * (rec - aij);
            nrm += aij * aij;
        }
        if nrm == 0.0 {
            zero_rows += 1;
            continue;
        }
        worst = worst.max((res / nrm).sqrt());
    }
    Ok(RowwiseBackward {
        max: worst,
        zero_rows,
    })
}

/// Singular values by one-sided Jacobi in binary64 on the widened input.
pub fn reference_svd<T: Real>(a: &Matrix<T>) -> Result<Vec<f64>> {
    let ah: Matrix<f64> = a.cast()?;
    Ok(onesided_jacobi_svd(&ah, &JacobiConfig::default())?.sigma)
}

/// `σ_max / σ_min` from [`reference_svd`].
pub fn estimate_kappa<T: Real>(b: &Matrix<T>) -> Result<f64> {
    let s = reference_svd(b)?;
    Ok(s[0] / s[s.len() - 1])
}

/// Everything measured for one (problem, method) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub max_rel_sv_err: f64,
    pub orth_u: f64,
    pub orth_v: f64,
    pub rowwise_backward_max: f64,
    pub zero_rows: usize,
    pub kappa_b_realized: f64,
    pub kappa_d: f64,
    pub bound_sv: f64,
    pub bound_orth: f64,
    pub bound_backward: f64,
    pub assumption_holds: bool,
}

/// Measures `factors` against `sigma_ref` and evaluates the bounds for
/// `variant` with `bp`.
pub fn report<T: Real>(
    a: &Matrix<T>,
    factors: &SvdFactors<T>,
    sigma_ref: &[f64],
    kappa_b: f64,
    kappa_d: f64,
    variant: EigensolverChoice,
    bp: &BoundParams,
) -> Result<MetricsReport> {
    let back = rowwise_backward_error(a, &factors.u, &factors.sigma, &factors.v)?;
    let bounds = theoretical_bounds(bp, a.cols(), kappa_b, variant);
    Ok(MetricsReport {
        max_rel_sv_err: max_rel_sv_error(&factors.sigma, sigma_ref)?,
        orth_u: orth_error(&factors.u),
        orth_v: orth_error(&factors.v),
        rowwise_backward_max: back.max,
        zero_rows: back.zero_rows,
        kappa_b_realized: kappa_b,
        kappa_d,
        bound_sv: bounds.sv,
        bound_orth: bounds.orth,
        bound_backward: bounds.backward,
        assumption_holds: bounds.assumption_holds,
    })
}
