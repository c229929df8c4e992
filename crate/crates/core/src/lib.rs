//! Mixed precision thin SVD of tall-and-skinny matrices.
//!
//! The Gram matrix `AᵀA` is formed and decomposed in a higher precision,
//! and `U = A·(V·Σ⁻¹)` is recovered in the working precision. Coupled with a
//! Jacobi eigensolver the computed singular values have high relative
//! accuracy: their error depends on the condition number of the
//! column-equilibrated factor `B` of `A = B·D`, not on `κ(A)`.
//!
//! Kernels are generic over [`Real`]; the mixed precision drivers pair a
//! working type with its [`Widen::Wide`] type. The aliases below name the
//! binary32/binary64 pairing used throughout the experiments.
//!
//! ```
//! use mpsvd::{mp_thin_svd, EigensolverChoice, ThinSvdOptions, WorkingMatrix};
//!
//! let a = WorkingMatrix::from_rows(&[&[3.0, 0.0], &[0.0, 2.0], &[0.0, 0.0]]).unwrap();
//! let svd = mp_thin_svd(&a, EigensolverChoice::TwoSidedJacobi, &ThinSvdOptions::default()).unwrap();
//! assert_eq!(svd.factors.sigma, vec![3.0, 2.0]);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod jacobi;
pub mod kernels;
pub mod matgen;
pub mod matrix;
pub mod metrics;
pub mod parallel;
pub mod precision;
pub mod thinsvd;

pub use error::{Error, Result};
pub use jacobi::{
    onesided_jacobi_svd, twosided_jacobi_eig, EigFactors, JacobiConfig, JacobiStats, SvdFactors,
};
pub use kernels::{
    cholesky, col_norms, gram, householder_qr, orth_error, pivoted_qr_r, scale_columns,
};
pub use matgen::{build_problem, GeneratedProblem, TestMatrixSpec};
pub use matrix::{Diag, Matrix};
pub use metrics::{BoundParams, MetricsReport, TheoreticalBounds};
pub use parallel::{partitioned_gram, sync_count, PartitionPlan};
pub use precision::{Precision, Real, Widen};
pub use thinsvd::{
    gram_chol_eigensolver, mp_cholesky_qr, mp_thin_svd, onesided_gram_eig, qr_thin_svd_baseline,
    run_method, EigensolverChoice, GramMode, Method, PhaseTimings, ThinSvdOptions, ThinSvdResult,
};

/// Working precision scalar (IEEE binary32).
pub type Working = f32;
/// Higher precision scalar (IEEE binary64).
pub type Higher = f64;
pub type WorkingMatrix = Matrix<Working>;
pub type HigherMatrix = Matrix<Higher>;
pub type WorkingDiag = Diag<Working>;
pub type HigherDiag = Diag<Higher>;
pub type WorkingSvd = SvdFactors<Working>;
pub type Problem = GeneratedProblem<Working>;
