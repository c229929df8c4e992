//! Mixed precision thin SVD through a higher precision Gram matrix, the
//! Cholesky-based Gram eigensolver, mixed precision Cholesky QR, and the
//! Householder QR + Jacobi baseline they are compared against.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_traits::Float;

use crate::error::{Error, Result};
use crate::jacobi::{
    normalize_signs, onesided_jacobi_svd, twosided_jacobi_eig, EigFactors, JacobiConfig,
    JacobiStats, SvdFactors,
};
use crate::kernels::{axpy, cholesky, gram, householder_qr, pivoted_qr_r, scale_columns};
use crate::matrix::{Diag, Matrix};
use crate::parallel::{partitioned_gram, PartitionPlan};
use crate::precision::{Real, Widen};

/// Spectral decomposition used for the higher precision Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EigensolverChoice {
    /// Two-sided Jacobi on `M_h` in the higher precision.
    TwoSidedJacobi,
    /// Cholesky of `M_h` in the higher precision, then one-sided Jacobi SVD
    /// of the rounded triangular factor in the working precision.
    GramCholSvd,
    /// One-sided Jacobi on `M_h` itself in the higher precision, after a
    /// pivoted QR preconditioning step; the singular values of an SPD matrix
    /// are its eigenvalues.
    OneSidedJacobiOnGram,
}

/// Any thin SVD method run by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Mp(EigensolverChoice),
    QrBaseline,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Mp(EigensolverChoice::TwoSidedJacobi),
        Method::Mp(EigensolverChoice::GramCholSvd),
        Method::Mp(EigensolverChoice::OneSidedJacobiOnGram),
        Method::QrBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mp(EigensolverChoice::TwoSidedJacobi) => "twosided-jacobi",
            Method::Mp(EigensolverChoice::GramCholSvd) => "gram-chol-svd",
            Method::Mp(EigensolverChoice::OneSidedJacobiOnGram) => "onesided-jacobi-gram",
            Method::QrBaseline => "qr-baseline",
        }
    }

    pub fn eigensolver(self) -> Option<EigensolverChoice> {
        match self {
            Method::Mp(c) => Some(c),
            Method::QrBaseline => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

impl From<EigensolverChoice> for Method {
    fn from(c: EigensolverChoice) -> Self {
        Method::Mp(c)
    }
}

/// Wall time per phase. The phases partition the total.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    /// Householder factorization (baseline only).
    pub qr: Duration,
    pub gram: Duration,
    pub eigen: Duration,
    pub compute_u: Duration,
    /// Everything else: casts, square roots, sign fixing.
    pub overlap: Duration,
}

impl PhaseTimings {
    pub fn total(&self) -> Duration {
        self.qr + self.gram + self.eigen + self.compute_u + self.overlap
    }
}

#[derive(Debug, Clone)]
pub struct ThinSvdResult<W> {
    pub factors: SvdFactors<W>,
    pub method: Method,
    pub timings: PhaseTimings,
}

/// How the Gram product is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GramMode {
    #[default]
    Sequential,
    /// Row-partitioned over `workers` threads with `blocks` logical blocks
    /// (`None`: default granularity for the worker count).
    Partitioned {
        workers: usize,
        blocks: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThinSvdOptions {
    pub jacobi: JacobiConfig,
    pub gram: GramMode,
}

impl From<JacobiConfig> for ThinSvdOptions {
    fn from(jacobi: JacobiConfig) -> Self {
        ThinSvdOptions {
            jacobi,
            gram: GramMode::Sequential,
        }
    }
}

struct Stopwatch(Instant);

impl Stopwatch {
    fn start() -> Self {
        Stopwatch(Instant::now())
    }

    /// Time since the last lap.
    fn lap(&mut self) -> Duration {
        let now = Instant::now();
        let d = now - self.0;
        self.0 = now;
        d
    }
}

fn form_gram<T: Real>(a: &Matrix<T>, mode: GramMode) -> Result<Matrix<T>> {
    match mode {
        GramMode::Sequential => Ok(gram(a)),
        GramMode::Partitioned { workers, blocks } => {
            let workers = workers.min(a.rows()).max(1);
            let plan = match blocks {
                Some(b) => PartitionPlan::new(a.rows(), b.min(a.rows()))?,
                None => PartitionPlan::for_workers(a.rows(), workers)?,
            };
            partitioned_gram(a, workers, &plan)
        }
    }
}

fn check_tall<T: Real>(a: &Matrix<T>) -> Result<()> {
    let (m, n) = a.shape();
    if n == 0 || m < n {
        return Err(Error::Shape(format!(
            "thin SVD needs m >= n >= 1, got {m}x{n}"
        )));
    }
    Ok(())
}

/// `A·(V·Σ⁻¹)`: columns of `V` are divided by `σ` first, then one product.
fn left_vectors<W: Real>(a: &Matrix<W>, v: &Matrix<W>, sigma: &[W]) -> Result<Matrix<W>> {
    let w = scale_columns(v, &Diag::new(sigma.to_vec()), true)?;
    a.matmul(&w)
}

/// Mixed precision thin SVD of a full column rank `A` (`m ≥ n`).
///
/// `A` is cast to the wide type, `M_h = A_hᵀA_h` is formed there and
/// decomposed with `choice`; `Σ` and `V` are rounded back and
/// `U = A(VΣ⁻¹)` is formed in the working precision.
pub fn mp_thin_svd<W: Widen>(
    a: &Matrix<W>,
    choice: EigensolverChoice,
    opts: &ThinSvdOptions,
) -> Result<ThinSvdResult<W>> {
    check_tall(a)?;
    let mut t = PhaseTimings::default();
    let mut sw = Stopwatch::start();

    let a_h: Matrix<W::Wide> = a.cast()?;
    t.overlap += sw.lap();

    let m_h = form_gram(&a_h, opts.gram)?;
    t.gram += sw.lap();

    let (mut v, sigma, stats): (Matrix<W>, Vec<W>, JacobiStats) = match choice {
        EigensolverChoice::TwoSidedJacobi => {
            let eig = twosided_jacobi_eig(&m_h, &opts.jacobi)?;
            t.eigen += sw.lap();
            let sigma = eig.lambda.iter().map(|&l| l.sqrt().cast::<W>()).collect();
            (eig.v.cast()?, sigma, eig.stats)
        }
        EigensolverChoice::OneSidedJacobiOnGram => {
            let eig = onesided_gram_eig(&m_h, &opts.jacobi)?;
            t.eigen += sw.lap();
            let sigma = eig.lambda.iter().map(|&l| l.sqrt().cast::<W>()).collect();
            (eig.v.cast()?, sigma, eig.stats)
        }
        EigensolverChoice::GramCholSvd => {
            let (v, sigma, stats) = gram_chol_eigensolver_impl::<W>(&m_h, &opts.jacobi)?;
            t.eigen += sw.lap();
            (v, sigma, stats)
        }
    };
    for (index, &s) in sigma.iter().enumerate() {
        if !s.is_finite() {
            return Err(Error::Overflow {
                row: index,
                col: index,
                value: s.as_f64(),
            });
        }
        if !(s >= W::min_positive_value()) {
            return Err(Error::TinySingularValue {
                index,
                value: s.as_f64(),
            });
        }
    }
    normalize_signs(&mut v, None);
    t.overlap += sw.lap();

    let u = left_vectors(a, &v, &sigma)?;
    t.compute_u += sw.lap();

    Ok(ThinSvdResult {
        factors: SvdFactors { u, sigma, v, stats },
        method: Method::Mp(choice),
        timings: t,
    })
}

/// Eigenpairs of an SPD matrix by one-sided Jacobi, preconditioned with
/// row-sorted, column-pivoted QR: `Π·M·P = Q·R`, `Rᵀ = U_R Σ V_Rᵀ`, so `M`'s eigenvectors are
/// `P·U_R` and its eigenvalues are `Σ`.
pub fn onesided_gram_eig<T: Real>(m: &Matrix<T>, cfg: &JacobiConfig) -> Result<EigFactors<T>> {
    // rows in decreasing ∞-norm keep the Householder steps rowwise stable
    let n = m.cols();
    let row_max = |i: usize| (0..n).fold(T::zero(), |acc, j| acc.max(m[(i, j)].abs()));
    let mut order: Vec<usize> = (0..m.rows()).collect();
    order.sort_by(|&a, &b| {
        row_max(b)
            .partial_cmp(&row_max(a))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sorted = Matrix::from_fn(m.rows(), n, |i, j| m[(order[i], j)]);
    let (r, perm) = pivoted_qr_r(&sorted)?;
    let svd = onesided_jacobi_svd(&r.transpose(), cfg)?;
    let mut v = Matrix::zeros(n, n);
    for j in 0..n {
        for (i, &p) in perm.iter().enumerate() {
            v[(p, j)] = svd.u[(i, j)];
        }
    }
    Ok(EigFactors {
        v,
        lambda: svd.sigma,
        stats: svd.stats,
    })
}

/// Gram eigensolver through Cholesky: `R_h = chol(M_h)` in the wide type,
/// `R = working(R_h)`, `R = U_R Σ Vᵀ` by one-sided Jacobi in the working
/// type. Returns `(V, σ)`; `U_R` is discarded.
pub fn gram_chol_eigensolver<W: Widen>(
    m_h: &Matrix<W::Wide>,
    cfg: &JacobiConfig,
) -> Result<(Matrix<W>, Vec<W>)> {
    let (v, sigma, _) = gram_chol_eigensolver_impl::<W>(m_h, cfg)?;
    Ok((v, sigma))
}

fn gram_chol_eigensolver_impl<W: Widen>(
    m_h: &Matrix<W::Wide>,
    cfg: &JacobiConfig,
) -> Result<(Matrix<W>, Vec<W>, JacobiStats)> {
    let r_h = cholesky(m_h)?;
    let r: Matrix<W> = r_h.cast()?;
    let svd = onesided_jacobi_svd(&r, cfg)?;
    Ok((svd.v, svd.sigma, svd.stats))
}

/// Mixed precision Cholesky QR: Gram and Cholesky in the wide type, then
/// each row of `Q` from `Q(i,:)·R = A(i,:)` in the working type.
pub fn mp_cholesky_qr<W: Widen>(a: &Matrix<W>) -> Result<(Matrix<W>, Matrix<W>)> {
    check_tall(a)?;
    let a_h: Matrix<W::Wide> = a.cast()?;
    let r_h = cholesky(&gram(&a_h))?;
    let r: Matrix<W> = r_h.cast()?;
    let n = a.cols();
    // Column j of Q is (A(:,j) − Σ_{k<j} Q(:,k)·R(k,j)) / R(j,j), which is
    // the row-wise substitution performed for all rows at once.
    let mut q = a.clone();
    for j in 0..n {
        for k in 0..j {
            let rkj = r[(k, j)];
            let (qk, qj) = q.col_pair_mut(k, j);
            axpy(-rkj, qk, qj);
        }
        let rjj = r[(j, j)];
        q.col_mut(j).iter_mut().for_each(|x| *x = *x / rjj);
    }
    Ok((q, r))
}

/// Householder QR, one-sided Jacobi SVD of the `n × n` factor, `U = Q·U_R`,
/// all in the precision of `A`.
pub fn qr_thin_svd_baseline<T: Real>(
    a: &Matrix<T>,
    cfg: &JacobiConfig,
) -> Result<ThinSvdResult<T>> {
    check_tall(a)?;
    let mut t = PhaseTimings::default();
    let mut sw = Stopwatch::start();
    let (q, r) = householder_qr(a)?;
    t.qr += sw.lap();
    let svd = onesided_jacobi_svd(&r, cfg)?;
    t.eigen += sw.lap();
    let u = q.matmul(&svd.u)?;
    t.compute_u += sw.lap();
    Ok(ThinSvdResult {
        factors: SvdFactors {
            u,
            sigma: svd.sigma,
            v: svd.v,
            stats: svd.stats,
        },
        method: Method::QrBaseline,
        timings: t,
    })
}

/// Runs `method` on `a`.
pub fn run_method<W: Widen>(
    a: &Matrix<W>,
    method: Method,
    opts: &ThinSvdOptions,
) -> Result<ThinSvdResult<W>> {
    match method {
        Method::Mp(choice) => mp_thin_svd(a, choice, opts),
        Method::QrBaseline => qr_thin_svd_baseline(a, &opts.jacobi),
    }
}
