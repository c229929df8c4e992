//! Timing breakdown of every method on Gaussian inputs.

use std::fs;
use std::time::{Duration, Instant};

use mpsvd::parallel::{partitioned_gram_counted, GramCounters};
use mpsvd::{orth_error, run_method, Method, PartitionPlan, PhaseTimings, WorkingMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::accuracy::solver_options;
use crate::config::SuiteConfig;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfRow {
    pub n: usize,
    pub m_ratio: usize,
    pub m: usize,
    pub threads: usize,
    pub gram_blocks: usize,
    pub seed: u64,
    pub method: String,
    pub runs: usize,
    pub error: String,
    /// Median wall time of the timed runs.
    pub total_s: Option<f64>,
    pub qr_s: Option<f64>,
    pub gram_s: Option<f64>,
    pub eigen_s: Option<f64>,
    pub compute_u_s: Option<f64>,
    pub overlap_s: Option<f64>,
    pub phase_sum_s: Option<f64>,
    pub ratio_to_qr: Option<f64>,
    /// Global synchronizations per Gram product (0 for the QR baseline).
    pub syncs: usize,
    pub sigma_max: Option<f32>,
    pub sigma_min: Option<f32>,
    #[serde(rename = "orth_U")]
    pub orth_u: Option<f64>,
}

impl PerfRow {
    pub fn without_timing(&self) -> Self {
        PerfRow {
            threads: 0,
            total_s: None,
            qr_s: None,
            gram_s: None,
            eigen_s: None,
            compute_u_s: None,
            overlap_s: None,
            phase_sum_s: None,
            ratio_to_qr: None,
            ..self.clone()
        }
    }
}

/// Standard normal `m × n` matrix from ChaCha20 stream 0 of `seed`.
pub fn gaussian(m: usize, n: usize, seed: u64) -> WorkingMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let data: Vec<f32> = (0..m * n)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    WorkingMatrix::from_col_major(m, n, data).expect("normal samples are finite")
}

fn secs(d: Duration) -> Option<f64> {
    Some(d.as_secs_f64())
}

/// Times every configured method at every configured `m_ratio`, writing
/// `cfg.out_path` (default `perf.csv`).
pub fn run_perf_suite(cfg: &SuiteConfig) -> Result<Vec<PerfRow>> {
    cfg.validate()?;
    let opts = solver_options(cfg);
    let mut rows = Vec::new();
    for &r in &cfg.m_ratios {
        let m = r * cfg.n;
        let a = gaussian(m, cfg.n, cfg.seed);
        let syncs = {
            let counters = GramCounters::default();
            let plan = PartitionPlan::new(m, cfg.gram_blocks.min(m))?;
            partitioned_gram_counted(&a.cast::<f64>()?, cfg.threads.min(m), &plan, &counters)?;
            counters.syncs()
        };
        let first = rows.len();
        for &method in &cfg.methods {
            let mut row = PerfRow {
                n: cfg.n,
                m_ratio: r,
                m,
                threads: cfg.threads,
                gram_blocks: cfg.gram_blocks,
                seed: cfg.seed,
                method: method.name().to_string(),
                runs: cfg.runs,
                error: String::new(),
                total_s: None,
                qr_s: None,
                gram_s: None,
                eigen_s: None,
                compute_u_s: None,
                overlap_s: None,
                phase_sum_s: None,
                ratio_to_qr: None,
                syncs: if method == Method::QrBaseline {
                    0
                } else {
                    syncs
                },
                sigma_max: None,
                sigma_min: None,
                orth_u: None,
            };
            match time_method(&a, method, cfg.runs, &opts) {
                Ok((total, phases, sigma, orth)) => {
                    row.total_s = secs(total);
                    row.qr_s = secs(phases.qr);
                    row.gram_s = secs(phases.gram);
                    row.eigen_s = secs(phases.eigen);
                    row.compute_u_s = secs(phases.compute_u);
                    row.overlap_s = secs(phases.overlap);
                    row.phase_sum_s = secs(phases.total());
                    row.sigma_max = sigma.first().copied();
                    row.sigma_min = sigma.last().copied();
                    row.orth_u = Some(orth);
                }
                Err(e) => row.error = e.to_string(),
            }
            rows.push(row);
        }
        let qr = rows[first..]
            .iter()
            .find(|x| x.method == Method::QrBaseline.name())
            .and_then(|x| x.total_s);
        for row in &mut rows[first..] {
            row.ratio_to_qr = match (row.total_s, qr) {
                (Some(t), Some(q)) if q > 0.0 => Some(t / q),
                _ => None,
            };
        }
    }
    let path = cfg.out_or("perf.csv");
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(&path)?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(rows)
}

/// One warm-up, then `runs` timed calls. Returns the median wall time, the
/// phase breakdown of that same call, σ and `orth_error(U)`.
fn time_method(
    a: &WorkingMatrix,
    method: Method,
    runs: usize,
    opts: &mpsvd::ThinSvdOptions,
) -> mpsvd::Result<(Duration, PhaseTimings, Vec<f32>, f64)> {
    let warm = run_method(a, method, opts)?;
    let mut samples = Vec::with_capacity(runs);
    for _ in 0..runs {
        let t = Instant::now();
        let r = run_method(a, method, opts)?;
        samples.push((t.elapsed(), r.timings));
    }
    samples.sort_by_key(|s| s.0);
    let (total, phases) = samples[samples.len() / 2];
    let orth = orth_error(&warm.factors.u);
    Ok((total, phases, warm.factors.sigma, orth))
}
