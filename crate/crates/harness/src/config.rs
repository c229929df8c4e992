//! Suite configuration, from a `key=value` file and/or command-line flags.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mpsvd::Method;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub n: usize,
    /// `m = m_ratio · n`, one suite pass per entry.
    pub m_ratios: Vec<usize>,
    pub kappa_b: Vec<f64>,
    pub kappa_d: Vec<f64>,
    pub matrix_ids: Vec<u8>,
    pub methods: Vec<Method>,
    pub seed: u64,
    pub threads: usize,
    /// Logical row blocks of the Gram product, fixed independently of
    /// `threads` so that results do not depend on the thread count.
    pub gram_blocks: usize,
    /// Timed repetitions per perf measurement (after one warm-up).
    pub runs: usize,
    pub out_path: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            n: 64,
            m_ratios: vec![16],
            kappa_b: vec![1e1, 1e2, 1e3, 1e4, 1e5],
            kappa_d: vec![1.0, 1e2, 1e4, 1e6, 1e8],
            matrix_ids: (1..=16).collect(),
            methods: Method::ALL.to_vec(),
            seed: 1,
            threads: 1,
            gram_blocks: 16,
            runs: 5,
            out_path: None,
        }
    }
}

pub fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| HarnessError::Usage(format!("{key}: bad value {s:?}: {e}")))
        })
        .collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| HarnessError::Usage(format!("{key}: bad value {value:?}: {e}")))
}

impl SuiteConfig {
    /// Sets one field from its config-file key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.n = parse_one(key, value)?,
            "m_ratio" | "m-ratio" => self.m_ratios = parse_list(key, value)?,
            "kappa_b" | "kappa-b" => self.kappa_b = parse_list(key, value)?,
            "kappa_d" | "kappa-d" => self.kappa_d = parse_list(key, value)?,
            "matrix_ids" | "matrix-ids" => self.matrix_ids = parse_list(key, value)?,
            "eigensolvers" | "eigensolver" | "methods" => self.methods = parse_list(key, value)?,
            "seed" => self.seed = parse_one(key, value)?,
            "threads" => self.threads = parse_one(key, value)?,
            "gram_blocks" | "gram-blocks" => self.gram_blocks = parse_one(key, value)?,
            "runs" => self.runs = parse_one(key, value)?,
            "out" | "out_path" => self.out_path = Some(PathBuf::from(value.trim())),
            _ => return Err(HarnessError::Usage(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                HarnessError::Usage(format!("config line {}: expected key=value", no + 1))
            })?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            HarnessError::Usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Usage(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.m_ratios.is_empty()
            || self.kappa_b.is_empty()
            || self.kappa_d.is_empty()
            || self.matrix_ids.is_empty()
            || self.methods.is_empty()
        {
            return bad("every list must be nonempty".into());
        }
        if let Some(r) = self.m_ratios.iter().find(|&&r| r < 1) {
            return bad(format!("m_ratio must be at least 1, got {r}"));
        }
        for k in self.kappa_b.iter().chain(&self.kappa_d) {
            if !(k.is_finite() && *k >= 1.0) {
                return bad(format!(
                    "condition numbers must be finite and >= 1, got {k}"
                ));
            }
        }
        if let Some(id) = self.matrix_ids.iter().find(|id| !(1..=16).contains(*id)) {
            return bad(format!("matrix ids must be in 1..=16, got {id}"));
        }
        if self.threads == 0 || self.gram_blocks == 0 || self.runs == 0 {
            return bad("threads, gram_blocks and runs must be positive".into());
        }
        Ok(())
    }

    pub fn out_or(&self, default: &str) -> PathBuf {
        self.out_path
            .clone()
            .unwrap_or_else(|| PathBuf::from(default))
    }
}
