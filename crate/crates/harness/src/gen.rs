//! `gen`: one generated problem written to a directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use mpsvd::{build_problem, HigherMatrix, Problem, TestMatrixSpec};

use crate::error::{HarnessError, Result};

pub const FILES: [&str; 5] = ["A.txt", "B.txt", "D.txt", "sigma_ref.txt", "meta.txt"];

/// Writes `A`, `B`, `D` (as a column) and `sigma_ref` in the matrix text
/// format, plus `meta.txt` with one `key=value` per line.
pub fn gen_command(spec: &TestMatrixSpec, out_dir: &Path) -> Result<Problem> {
    spec.validate()
        .map_err(|e| HarnessError::Usage(e.to_string()))?;
    mpsvd::matgen::matrix_id_to_modes(spec.matrix_id)
        .map_err(|e| HarnessError::Usage(e.to_string()))?;
    let p: Problem = build_problem(spec)?;
    fs::create_dir_all(out_dir)?;
    let path = |name: &str| -> PathBuf { out_dir.join(name) };
    p.a.save(path("A.txt"))?;
    p.b.save(path("B.txt"))?;
    p.d.to_column().save(path("D.txt"))?;
    HigherMatrix::from_col_major(p.sigma_ref.len(), 1, p.sigma_ref.clone())?
        .save(path("sigma_ref.txt"))?;
    fs::write(path("meta.txt"), metadata(&p))?;
    Ok(p)
}

pub fn metadata(p: &Problem) -> String {
    let s = &p.spec;
    let mut out = String::new();
    let _ = writeln!(out, "m={}", s.m);
    let _ = writeln!(out, "n={}", s.n);
    let _ = writeln!(out, "kappa_b={}", s.kappa_b);
    let _ = writeln!(out, "kappa_d={}", s.kappa_d);
    let _ = writeln!(out, "matrix_id={}", s.matrix_id);
    let _ = writeln!(out, "seed={}", s.seed);
    let _ = writeln!(out, "realized_kappa_b={}", p.realized_kappa_b);
    let _ = writeln!(out, "realized_kappa_a={}", p.realized_kappa_a);
    out
}

/// Parses `meta.txt` back into `(key, value)` pairs.
pub fn read_metadata(path: &Path) -> Result<Vec<(String, String)>> {
    Ok(fs::read_to_string(path)?
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect())
}
