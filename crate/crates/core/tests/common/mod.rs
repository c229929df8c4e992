#![allow(dead_code)]

pub mod dd;

use mpsvd::{col_norms, metrics::estimate_kappa, scale_columns, Matrix, Real};

pub const U: f64 = f32::UNIT_ROUNDOFF;
pub const UH: f64 = f64::UNIT_ROUNDOFF;

/// κ of the column-equilibrated factor of `a`, measured in binary64.
pub fn kappa_b<T: Real>(a: &Matrix<T>) -> f64 {
    let ah: Matrix<f64> = a.cast().unwrap();
    let d = col_norms(&ah).unwrap();
    estimate_kappa(&scale_columns(&ah, &d, true).unwrap()).unwrap()
}

pub fn max_rel(x: &[f64], reference: &[f64]) -> f64 {
    assert_eq!(x.len(), reference.len());
    x.iter()
        .zip(reference)
        .map(|(a, b)| ((a - b) / b).abs())
        .fold(0.0, f64::max)
}

pub fn widen<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}
