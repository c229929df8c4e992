//! Reproducible test matrices `A = B·D` with prescribed `κ(B)` and `κ(D)`.
//!
//! `D` and the spectrum `Σ` of `B` come from the five classic diagonal
//! modes. `B = W₁·Σ·W₂ᵀ·W₃` where `W₁`, `W₂` are Haar-distributed
//! orthonormal factors and `W₃` is a product of plane rotations that drives
//! every column norm to one (Bendel–Mickey / Davies–Higham equilibration).
//! Everything is generated in binary64; only `A` is rounded to the target
//! precision.
//!
//! Randomness comes from ChaCha20 seeded with `TestMatrixSpec::seed`, one stream
//! per consumer:
//!
//! | stream | consumer                 |
//! |--------|--------------------------|
//! | 1      | Gaussian draws for `W₁`  |
//! | 2      | Gaussian draws for `W₂`  |
//! | 3      | mode 5 draws for `D`     |
//! | 4      | mode 5 draws for `Σ`     |

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Open01, StandardNormal};

use crate::error::{Error, Result};
use crate::kernels::{householder_qr, scale_columns};
use crate::matrix::{Diag, Matrix};
use crate::metrics::{estimate_kappa, reference_svd};
use crate::precision::Real;

pub const STREAM_W1: u64 = 1;
pub const STREAM_W2: u64 = 2;
pub const STREAM_D: u64 = 3;
pub const STREAM_SIGMA: u64 = 4;

/// Named substreams of one seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    pub seed: u64,
}

impl SeedStreams {
    pub fn new(seed: u64) -> Self {
        SeedStreams { seed }
    }

    pub fn stream(&self, id: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }
}

/// Diagonal distribution mode (1..=5) and its condition number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagMode {
    pub mode: u8,
    pub kappa: f64,
}

/// Diagonal entries in `[1/κ, 1]` following `dm.mode`:
///
/// 1. `d(1) = 1`, the rest `1/κ`
/// 2. all `1` except `d(n) = 1/κ`
/// 3. geometric, `d(i) = κ^{-(i-1)/(n-1)}`
/// 4. arithmetic, `d(i) = 1 − (i−1)/(n−1)·(1 − 1/κ)`
/// 5. `d(i) = κ^{-rᵢ}` with `rᵢ` uniform on `(0, 1)` drawn from `rng`
pub fn diag_from_mode<R: Rng + ?Sized>(dm: DiagMode, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    let kappa = dm.kappa;
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "kappa must be finite and >= 1, got {kappa}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let inv = 1.0 / kappa;
    let d = match dm.mode {
        1 => (0..n).map(|i| if i == 0 { 1.0 } else { inv }).collect(),
        2 => (0..n).map(|i| if i + 1 == n { inv } else { 1.0 }).collect(),
        3 | 4 if n < 2 => {
            return Err(Error::InvalidArgument(format!(
                "mode {} needs n >= 2",
                dm.mode
            )));
        }
        3 => {
            let last = (n - 1) as f64;
            (0..n)
                .map(|i| match i {
                    0 => 1.0,
                    _ if i + 1 == n => inv,
                    _ => kappa.powf(-(i as f64) / last),
                })
                .collect()
        }
        4 => {
            let last = (n - 1) as f64;
            (0..n)
                .map(|i| match i {
                    0 => 1.0,
                    _ if i + 1 == n => inv,
                    _ => 1.0 - (i as f64 / last) * (1.0 - inv),
                })
                .collect()
        }
        5 => (0..n)
            .map(|_| {
                let r: f64 = rng.sample(Open01);
                kappa.powf(-r)
            })
            .collect(),
        m => {
            return Err(Error::InvalidArgument(format!(
                "diagonal mode must be 1..=5, got {m}"
            )))
        }
    };
    Ok(d)
}

/// Haar-distributed `m × n` matrix with orthonormal columns: the Q factor of
/// a Gaussian matrix with the signs of `R`'s diagonal absorbed.
pub fn haar_orthonormal<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<Matrix<f64>> {
    if m < n || n == 0 {
        return Err(Error::Shape(format!(
            "Haar factor needs m >= n >= 1, got {m}x{n}"
        )));
    }
    let g = Matrix::from_fn(m, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let (mut q, r) = householder_qr(&g)?;
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.col_mut(j).iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(q)
}

/// `‖x‖² − 1`, evaluated with a compensated dot product.
fn unit_norm_defect(x: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for &v in x {
        let p = v * v;
        let perr = v.mul_add(v, -p);
        let t = s + p;
        let z = t - s;
        let e = (s - (t - z)) + (p - z);
        s = t;
        c += e + perr;
    }
    (s - 1.0) + c
}

fn accurate_norm(x: &[f64]) -> f64 {
    (1.0 + unit_norm_defect(x)).sqrt()
}

/// `m × n` matrix with unit-norm columns and singular values proportional
/// to `sigma` (rescaled so that `Σσᵢ² = n`).
pub fn unit_norm_column_matrix(
    sigma: &[f64],
    m: usize,
    streams: &SeedStreams,
) -> Result<Matrix<f64>> {
    let n = sigma.len();
    if n == 0 || m < n {
        return Err(Error::Shape(format!("need m >= n >= 1, got m={m}, n={n}")));
    }
    if let Some(i) = sigma.iter().position(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "sigma[{i}] is not positive"
        )));
    }
    let sumsq: f64 = sigma.iter().map(|s| s * s).sum();
    let gamma = (n as f64 / sumsq).sqrt();
    let scaled: Vec<f64> = sigma.iter().map(|s| s * gamma).collect();
    if let Some(i) = scaled
        .iter()
        .position(|&s| s * s > n as f64 * (1.0 + 1e-12))
    {
        return Err(Error::Infeasible(format!(
            "renormalized sigma[{i}]² exceeds n"
        )));
    }

    let w1 = haar_orthonormal(m, n, &mut streams.stream(STREAM_W1))?;
    let w2 = haar_orthonormal(n, n, &mut streams.stream(STREAM_W2))?;
    let core = Matrix::from_fn(n, n, |i, j| scaled[i] * w2[(j, i)]);
    let mut b = w1.matmul(&core)?;
    equilibrate_columns(&mut b)?;
    Ok(b)
}

/// Applies column rotations until every column has unit norm, preserving
/// the singular values. Each rotation pairs the shortest column with the
/// longest and makes the shorter one exactly unit length.
fn equilibrate_columns(b: &mut Matrix<f64>) -> Result<()> {
    let n = b.cols();
    let tol = 8.0 * f64::UNIT_ROUNDOFF;
    let mut defects: Vec<f64> = (0..n).map(|j| unit_norm_defect(b.col(j))).collect();
    for _ in 0..n * n {
        let (mut lo, mut hi) = (0, 0);
        for j in 0..n {
            if defects[j] < defects[lo] {
                lo = j;
            }
            if defects[j] > defects[hi] {
                hi = j;
            }
        }
        if defects[lo].abs() <= tol && defects[hi].abs() <= tol {
            break;
        }
        let (di, dj) = (defects[lo], defects[hi]);
        if !(di < 0.0 && dj > 0.0) {
            break;
        }
        let (ci, cj) = b.col_pair_mut(lo, hi);
        let aij: f64 = ci.iter().zip(cj.iter()).map(|(x, y)| x * y).sum();
        let sgn = if aij >= 0.0 { 1.0 } else { -1.0 };
        let root = (aij * aij - di * dj).sqrt();
        let t = di / (aij + sgn * root);
        let c = 1.0 / (1.0 + t * t).sqrt();
        let s = c * t;
        for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
            let (p, q) = (*x, *y);
            *x = c * p - s * q;
            *y = s * p + c * q;
        }
        defects[lo] = unit_norm_defect(ci);
        defects[hi] = unit_norm_defect(cj);
    }
    // remove the rounding left by the rotations; a relative change of a few
    // ulps per column
    for (j, d) in defects.iter().enumerate() {
        if d.abs() > tol {
            let s = accurate_norm(b.col(j));
            b.col_mut(j).iter_mut().for_each(|x| *x /= s);
        }
    }
    for j in 0..n {
        if unit_norm_defect(b.col(j)).abs() > tol {
            return Err(Error::Infeasible(format!(
                "column {j} did not reach unit norm"
            )));
        }
    }
    Ok(())
}

/// Recipe for one test problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestMatrixSpec {
    pub m: usize,
    pub n: usize,
    pub kappa_d: f64,
    pub kappa_b: f64,
    pub matrix_id: u8,
    pub seed: u64,
}

impl TestMatrixSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m < self.n {
            return Err(Error::InvalidArgument(format!(
                "need m >= n >= 1, got m={}, n={}",
                self.m, self.n
            )));
        }
        matrix_id_to_modes(self.matrix_id)?;
        for (name, k) in [("kappa_d", self.kappa_d), ("kappa_b", self.kappa_b)] {
            if !(k >= 1.0) || !k.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "{name} must be finite and >= 1, got {k}"
                )));
            }
        }
        Ok(())
    }
}

/// `(mode of D, mode of Σ)` for matrix ids 1..=16.
pub fn matrix_id_to_modes(id: u8) -> Result<(u8, u8)> {
    const TABLE: [(u8, u8); 16] = [
        (1, 2),
        (1, 3),
        (1, 4),
        (1, 5),
        (2, 3),
        (2, 4),
        (2, 5),
        (3, 2),
        (3, 4),
        (3, 5),
        (4, 2),
        (4, 3),
        (4, 5),
        (5, 2),
        (5, 3),
        (5, 4),
    ];
    match id {
        1..=16 => Ok(TABLE[usize::from(id) - 1]),
        _ => Err(Error::InvalidArgument(format!(
            "matrix id must be 1..=16, got {id}"
        ))),
    }
}

/// A realized test problem.
#[derive(Debug, Clone)]
pub struct GeneratedProblem<W> {
    pub spec: TestMatrixSpec,
    /// `B·D` rounded to the working type.
    pub a: Matrix<W>,
    pub b: Matrix<f64>,
    pub d: Diag<f64>,
    /// Reference singular values of `a`, descending.
    pub sigma_ref: Vec<f64>,
    /// `κ(B)` measured by the reference SVD.
    pub realized_kappa_b: f64,
    pub realized_kappa_a: f64,
}

/// Generates `A = B·D` without the reference computations.
pub fn generate<W: Real>(spec: &TestMatrixSpec) -> Result<(Matrix<W>, Matrix<f64>, Diag<f64>)> {
    spec.validate()?;
    let (mode_d, mode_s) = matrix_id_to_modes(spec.matrix_id)?;
    let streams = SeedStreams::new(spec.seed);
    let d = diag_from_mode(
        DiagMode {
            mode: mode_d,
            kappa: spec.kappa_d,
        },
        spec.n,
        &mut streams.stream(STREAM_D),
    )?;
    let sigma = diag_from_mode(
        DiagMode {
            mode: mode_s,
            kappa: spec.kappa_b,
        },
        spec.n,
        &mut streams.stream(STREAM_SIGMA),
    )?;
    let b = unit_norm_column_matrix(&sigma, spec.m, &streams)?;
    let d = Diag::positive(d)?;
    let a = scale_columns(&b, &d, false)?.cast()?;
    Ok((a, b, d))
}

/// Generates the problem together with its reference singular values and
/// realized condition numbers. A pure function of `spec`.
pub fn build_problem<W: Real>(spec: &TestMatrixSpec) -> Result<GeneratedProblem<W>> {
    let (a, b, d) = generate::<W>(spec)?;
    let sigma_ref = reference_svd(&a)?;
    let realized_kappa_b = estimate_kappa(&b)?;
    let realized_kappa_a = sigma_ref[0] / sigma_ref[sigma_ref.len() - 1];
    Ok(GeneratedProblem {
        spec: *spec,
        a,
        b,
        d,
        sigma_ref,
        realized_kappa_b,
        realized_kappa_a,
    })
}
