//! Double-double brute-force eigenvalue oracle for small symmetric
//! positive definite problems: compensated Gram plus bisection on inertia
//! counts of `M − xI`.

#![allow(dead_code)]

use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    pub fn scale(self, s: f64) -> Self {
        // exact for powers of two
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::new(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::new(q2);
        let q3 = r.hi / b.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd { hi: s, lo: e } + Dd::new(q3)
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let x = self.hi.sqrt();
        // one Newton step doubles the correct digits
        let (p, e) = two_prod(x, x);
        let r = (self - Dd { hi: p, lo: e }).hi;
        let (s, t) = quick_two_sum(x, r / (2.0 * x));
        Dd { hi: s, lo: t }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (s, e) = quick_two_sum(s, e + f);
        Dd { hi: s, lo: e }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + Dd {
            hi: -b.hi,
            lo: -b.lo,
        }
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (s, t) = quick_two_sum(p, e);
        Dd { hi: s, lo: t }
    }
}

/// `AᵀA` for a column-major `m×n` matrix, every product exact and every sum
/// carried in double-double.
pub fn gram(m: usize, n: usize, a: &[f64]) -> Vec<Vec<Dd>> {
    let mut g = vec![vec![Dd::ZERO; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = Dd::ZERO;
            for k in 0..m {
                let (p, e) = two_prod(a[i * m + k], a[j * m + k]);
                acc = acc + Dd { hi: p, lo: e };
            }
            g[i][j] = acc;
            g[j][i] = acc;
        }
    }
    g
}

/// Number of eigenvalues of `g` strictly below `x` (Sylvester inertia of the
/// unpivoted `LDLᵀ` of `g − xI`).
pub fn count_below(g: &[Vec<Dd>], x: Dd) -> usize {
    let n = g.len();
    let mut w: Vec<Vec<Dd>> = g.to_vec();
    for (i, row) in w.iter_mut().enumerate() {
        row[i] = row[i] - x;
    }
    let mut neg = 0;
    for k in 0..n {
        let mut p = w[k][k];
        if p.hi == 0.0 && p.lo == 0.0 {
            p = Dd::new(f64::MIN_POSITIVE);
        }
        if p.is_negative() {
            neg += 1;
        }
        let pivot_row = w[k].clone();
        for row in w.iter_mut().skip(k + 1) {
            let l = row[k].div(p);
            for (x, &y) in row.iter_mut().zip(&pivot_row).skip(k + 1) {
                *x = *x - l * y;
            }
        }
    }
    neg
}

/// Eigenvalues of an SPD matrix, descending, by bisection in double-double.
pub fn spd_eigenvalues(g: &[Vec<Dd>]) -> Vec<Dd> {
    let n = g.len();
    // Gershgorin upper bound
    let mut top = 0.0f64;
    for (i, row) in g.iter().enumerate() {
        let off: f64 = row
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| v.hi.abs())
            .sum();
        top = top.max(row[i].hi + off);
    }
    let top = Dd::new(top * 2.0);
    (0..n)
        .map(|k| {
            // the (k+1)-th largest is the smallest x with count_below(x) ≥ n − k
            let want = n - k;
            let (mut lo, mut hi) = (Dd::ZERO, top);
            for _ in 0..400 {
                let mid = (lo + hi).scale(0.5);
                if mid == lo || mid == hi {
                    break;
                }
                if count_below(g, mid) >= want {
                    hi = mid;
                } else {
                    lo = mid;
                }
                let w = (hi - lo).to_f64();
                if w <= 1e-30 * hi.to_f64().abs() {
                    break;
                }
            }
            (lo + hi).scale(0.5)
        })
        .collect()
}

/// Singular values of a column-major `m×n` matrix, descending.
pub fn singular_values(m: usize, n: usize, a: &[f64]) -> Vec<f64> {
    spd_eigenvalues(&gram(m, n, a))
        .into_iter()
        .map(|l| l.sqrt().to_f64())
        .collect()
}

/// Eigenvalues of a symmetric positive definite matrix given in binary64.
pub fn symmetric_eigenvalues(n: usize, a: &[f64]) -> Vec<f64> {
    let g: Vec<Vec<Dd>> = (0..n)
        .map(|i| (0..n).map(|j| Dd::new(a[j * n + i])).collect())
        .collect();
    spd_eigenvalues(&g).into_iter().map(Dd::to_f64).collect()
}
