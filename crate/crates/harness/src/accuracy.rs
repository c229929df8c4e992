//! The accuracy suite: every (κ(B), κ(D), matrix id) instance against every
//! configured method, one CSV row per pair.

use std::collections::HashSet;
use std::fs::{self, File};
use std::path::Path;
use std::time::Instant;

use mpsvd::metrics::{max_rel_sv_error, report};
use mpsvd::{
    build_problem, run_method, BoundParams, EigensolverChoice, Error, GramMode, Method, Problem,
    Real, TestMatrixSpec, ThinSvdOptions, ThinSvdResult,
};
use serde::{Deserialize, Serialize};

use crate::config::SuiteConfig;
use crate::error::{HarnessError, Result};

pub const U: f64 = f32::UNIT_ROUNDOFF;
pub const UH: f64 = f64::UNIT_ROUNDOFF;

/// Acceptance bound on the relative singular value error of a variant.
pub fn sv_bound(choice: EigensolverChoice, kappa_b: f64) -> f64 {
    let k2 = kappa_b * kappa_b;
    match choice {
        EigensolverChoice::GramCholSvd => 100.0 * (U * kappa_b + UH * k2),
        EigensolverChoice::TwoSidedJacobi | EigensolverChoice::OneSidedJacobiOnGram => {
            100.0 * (U + UH * k2)
        }
    }
}

pub fn backward_bound(n: usize) -> f64 {
    100.0 * (n as f64).sqrt() * U
}

pub fn orth_bound(n: usize, sv_bound: f64) -> f64 {
    100.0 * ((n as f64).sqrt() * U + n as f64 * sv_bound)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of one instance. κ(D) is left out on purpose: instances differing
/// only in κ(D) share `B`.
pub fn instance_seed(base: u64, m: usize, n: usize, kappa_b: f64, matrix_id: u8) -> u64 {
    [m as u64, n as u64, kappa_b.to_bits(), matrix_id as u64]
        .into_iter()
        .fold(splitmix64(base), |h, x| splitmix64(h ^ x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Instance {
    pub index: usize,
    pub spec: TestMatrixSpec,
}

/// m_ratio-major, then κ(B), then κ(D), matrix id innermost.
pub fn instances(cfg: &SuiteConfig) -> Vec<Instance> {
    let mut out = Vec::new();
    for &r in &cfg.m_ratios {
        let m = r * cfg.n;
        for &kb in &cfg.kappa_b {
            for &kd in &cfg.kappa_d {
                for &id in &cfg.matrix_ids {
                    out.push(Instance {
                        index: out.len(),
                        spec: TestMatrixSpec {
                            m,
                            n: cfg.n,
                            kappa_d: kd,
                            kappa_b: kb,
                            matrix_id: id,
                            seed: instance_seed(cfg.seed, m, cfg.n, kb, id),
                        },
                    });
                }
            }
        }
    }
    out
}

pub fn solver_options(cfg: &SuiteConfig) -> ThinSvdOptions {
    ThinSvdOptions {
        gram: GramMode::Partitioned {
            workers: cfg.threads,
            blocks: Some(cfg.gram_blocks),
        },
        ..ThinSvdOptions::default()
    }
}

/// One CSV row. Empty cells mean "not applicable" (baseline bounds) or
/// "not available" (error rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub instance: usize,
    pub m: usize,
    pub n: usize,
    pub kappa_b: f64,
    pub kappa_d: f64,
    pub matrix_id: u8,
    pub seed: u64,
    pub realized_kappa_b: Option<f64>,
    pub realized_kappa_a: Option<f64>,
    pub method: String,
    pub solver_used: String,
    pub error: String,
    pub max_rel_sv_err: Option<f64>,
    #[serde(rename = "orth_U")]
    pub orth_u: Option<f64>,
    #[serde(rename = "orth_V")]
    pub orth_v: Option<f64>,
    pub rowwise_backward_max: Option<f64>,
    pub zero_rows: Option<usize>,
    pub bound_sv: Option<f64>,
    pub bound_orth: Option<f64>,
    pub bound_backward: Option<f64>,
    pub theory_sv: Option<f64>,
    pub theory_orth: Option<f64>,
    pub theory_eps1: Option<f64>,
    pub assumption_holds: Option<bool>,
    pub agree_twosided: Option<f64>,
    pub agree_bound: Option<f64>,
    pub pass_sv: Option<bool>,
    pub pass_backward: Option<bool>,
    pub pass_orth: Option<bool>,
    pub pass_theory: Option<bool>,
    pub pass_agree: Option<bool>,
    pub pass: Option<bool>,
    pub wall_time_s: f64,
}

type RowKey = (usize, usize, u64, u64, u8, u64, String);

impl AccuracyRow {
    fn blank(inst: &Instance, method: Method) -> Self {
        let s = &inst.spec;
        AccuracyRow {
            instance: inst.index,
            m: s.m,
            n: s.n,
            kappa_b: s.kappa_b,
            kappa_d: s.kappa_d,
            matrix_id: s.matrix_id,
            seed: s.seed,
            realized_kappa_b: None,
            realized_kappa_a: None,
            method: method.name().to_string(),
            solver_used: method.name().to_string(),
            error: String::new(),
            max_rel_sv_err: None,
            orth_u: None,
            orth_v: None,
            rowwise_backward_max: None,
            zero_rows: None,
            bound_sv: None,
            bound_orth: None,
            bound_backward: None,
            theory_sv: None,
            theory_orth: None,
            theory_eps1: None,
            assumption_holds: None,
            agree_twosided: None,
            agree_bound: None,
            pass_sv: None,
            pass_backward: None,
            pass_orth: None,
            pass_theory: None,
            pass_agree: None,
            pass: None,
            wall_time_s: 0.0,
        }
    }

    fn key(&self) -> RowKey {
        (
            self.m,
            self.n,
            self.kappa_b.to_bits(),
            self.kappa_d.to_bits(),
            self.matrix_id,
            self.seed,
            self.method.clone(),
        )
    }

    pub fn method(&self) -> Option<Method> {
        self.method.parse().ok()
    }

    pub fn is_error(&self) -> bool {
        !self.error.is_empty()
    }

    /// A hard bound failed on an otherwise successful row.
    pub fn is_bound_failure(&self) -> bool {
        !self.is_error() && self.pass == Some(false)
    }

    /// The row with its timing column cleared, for determinism checks.
    pub fn without_timing(&self) -> Self {
        AccuracyRow {
            wall_time_s: 0.0,
            ..self.clone()
        }
    }
}

fn run_with_fallback(
    a: &mpsvd::WorkingMatrix,
    method: Method,
    opts: &ThinSvdOptions,
) -> mpsvd::Result<ThinSvdResult<f32>> {
    match run_method(a, method, opts) {
        Err(Error::NotPositiveDefinite { .. })
            if method == Method::Mp(EigensolverChoice::GramCholSvd) =>
        {
            run_method(a, Method::Mp(EigensolverChoice::TwoSidedJacobi), opts)
        }
        r => r,
    }
}

fn fill_metrics(
    row: &mut AccuracyRow,
    p: &Problem,
    method: Method,
    r: &ThinSvdResult<f32>,
    bp: &BoundParams,
) -> mpsvd::Result<()> {
    let n = p.spec.n;
    let kb = p.realized_kappa_b;
    row.solver_used = r.method.name().to_string();
    // theoretical bounds follow the solver that produced the factors
    let variant = r
        .method
        .eigensolver()
        .unwrap_or(EigensolverChoice::TwoSidedJacobi);
    let rep = report(
        &p.a,
        &r.factors,
        &p.sigma_ref,
        kb,
        p.spec.kappa_d,
        variant,
        bp,
    )?;
    row.max_rel_sv_err = Some(rep.max_rel_sv_err);
    row.orth_u = Some(rep.orth_u);
    row.orth_v = Some(rep.orth_v);
    row.rowwise_backward_max = Some(rep.rowwise_backward_max);
    row.zero_rows = Some(rep.zero_rows);
    let Method::Mp(choice) = method else {
        return Ok(());
    };
    let bsv = sv_bound(choice, kb);
    let theory = mpsvd::metrics::theoretical_bounds(bp, n, kb, variant);
    row.bound_sv = Some(bsv);
    row.bound_orth = Some(orth_bound(n, bsv));
    row.bound_backward = Some(backward_bound(n));
    row.theory_sv = Some(theory.sv);
    row.theory_orth = Some(theory.orth);
    row.theory_eps1 = Some(theory.eps1);
    row.assumption_holds = Some(theory.assumption_holds);
    row.pass_sv = Some(rep.max_rel_sv_err <= bsv);
    row.pass_backward = Some(rep.rowwise_backward_max <= backward_bound(n));
    row.pass_orth = Some(rep.orth_u <= orth_bound(n, bsv));
    row.pass_theory = theory
        .assumption_holds
        .then_some(rep.max_rel_sv_err <= theory.sv);
    Ok(())
}

fn finish(row: &mut AccuracyRow) {
    if row.is_error() {
        return;
    }
    let ok = |flag: Option<bool>| flag != Some(false);
    // the baseline has no flags set and passes trivially
    row.pass = Some(
        ok(row.pass_sv)
            && ok(row.pass_backward)
            && ok(row.pass_orth)
            && ok(row.pass_theory)
            && ok(row.pass_agree),
    );
}

/// Evaluates `methods` on one instance. Pure apart from the wall-time
/// column.
pub fn evaluate_instance(
    inst: &Instance,
    methods: &[Method],
    opts: &ThinSvdOptions,
) -> Vec<AccuracyRow> {
    let problem = match build_problem::<f32>(&inst.spec) {
        Ok(p) => p,
        Err(e) => {
            return methods
                .iter()
                .map(|&m| AccuracyRow {
                    error: format!("generation: {e}"),
                    ..AccuracyRow::blank(inst, m)
                })
                .collect()
        }
    };
    let bp = BoundParams::single_double(inst.spec.n);
    let twosided = Method::Mp(EigensolverChoice::TwoSidedJacobi);
    let needs_reference = methods
        .iter()
        .any(|&m| matches!(m, Method::Mp(c) if c != EigensolverChoice::TwoSidedJacobi));
    let mut reference_sigma: Option<Vec<f32>> = None;
    let mut rows = Vec::with_capacity(methods.len());
    let mut order: Vec<Method> = methods.to_vec();
    // the two-sided run comes first so the other variants can be compared to it
    order.sort_by_key(|&m| m != twosided);
    if needs_reference && !order.contains(&twosided) {
        reference_sigma = run_method(&problem.a, twosided, opts)
            .ok()
            .map(|r| r.factors.sigma);
    }
    for method in order {
        let mut row = AccuracyRow::blank(inst, method);
        row.realized_kappa_b = Some(problem.realized_kappa_b);
        row.realized_kappa_a = Some(problem.realized_kappa_a);
        let t = Instant::now();
        let result = run_with_fallback(&problem.a, method, opts);
        row.wall_time_s = t.elapsed().as_secs_f64();
        match result {
            Ok(r) => {
                if let Err(e) = fill_metrics(&mut row, &problem, method, &r, &bp) {
                    row.error = format!("metrics: {e}");
                }
                if method == twosided {
                    reference_sigma = Some(r.factors.sigma.clone());
                } else if let (Method::Mp(choice), Some(reference)) = (method, &reference_sigma) {
                    if let Ok(d) = max_rel_sv_error(&r.factors.sigma, reference) {
                        let bound = sv_bound(choice, problem.realized_kappa_b)
                            + sv_bound(EigensolverChoice::TwoSidedJacobi, problem.realized_kappa_b);
                        row.agree_twosided = Some(d);
                        row.agree_bound = Some(bound);
                        row.pass_agree = Some(d <= bound);
                    }
                }
            }
            Err(e) => row.error = e.to_string(),
        }
        finish(&mut row);
        rows.push(row);
    }
    // restore the configured method order
    rows.sort_by_key(|r| methods.iter().position(|m| m.name() == r.method));
    rows
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOutcome {
    /// All rows of the output file, previously present ones included.
    pub rows: Vec<AccuracyRow>,
    /// Rows computed by this invocation.
    pub computed: usize,
}

impl SuiteOutcome {
    pub fn errors(&self) -> usize {
        self.rows.iter().filter(|r| r.is_error()).count()
    }

    pub fn bound_failures(&self) -> usize {
        self.rows.iter().filter(|r| r.is_bound_failure()).count()
    }

    /// 0: all hard bounds pass, 1: a bound failed, 3: a solver or generation
    /// error was recorded.
    pub fn exit_code(&self) -> u8 {
        if self.errors() > 0 {
            3
        } else if self.bound_failures() > 0 {
            1
        } else {
            0
        }
    }
}

/// Reads the rows of an earlier (possibly interrupted) run. A truncated
/// trailing record is dropped.
pub fn read_rows(path: &Path) -> Result<Vec<AccuracyRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let expected = header();
    if rdr
        .headers()?
        .iter()
        .ne(expected.iter().map(String::as_str))
    {
        return Err(HarnessError::Io(format!(
            "{} is not an accuracy CSV of this version",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.deserialize() {
        match rec {
            Ok(r) => rows.push(r),
            Err(_) => break,
        }
    }
    Ok(rows)
}

/// Column names, in order.
pub fn header() -> Vec<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let sample = AccuracyRow::blank(
        &Instance {
            index: 0,
            spec: TestMatrixSpec {
                m: 1,
                n: 1,
                kappa_d: 1.0,
                kappa_b: 1.0,
                matrix_id: 1,
                seed: 0,
            },
        },
        Method::QrBaseline,
    );
    w.serialize(&sample).expect("serializing to memory");
    let data = w.into_inner().expect("flushing to memory");
    let mut r = csv::Reader::from_reader(data.as_slice());
    r.headers()
        .expect("header row")
        .iter()
        .map(str::to_string)
        .collect()
}

/// Runs the suite, writing `cfg.out_path` (default `accuracy.csv`).
pub fn run_accuracy_suite(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    run_accuracy_suite_with(cfg, |_| {})
}

/// As [`run_accuracy_suite`], calling `on_row` for every newly computed row.
/// Rows already present in the output file are kept and not recomputed.
pub fn run_accuracy_suite_with(
    cfg: &SuiteConfig,
    mut on_row: impl FnMut(&AccuracyRow),
) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let path = cfg.out_or("accuracy.csv");
    let mut rows = if path.exists() && fs::metadata(&path)?.len() > 0 {
        read_rows(&path)?
    } else {
        Vec::new()
    };
    let done: HashSet<RowKey> = rows.iter().map(AccuracyRow::key).collect();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    // rewrite the kept rows so a truncated tail is gone before appending
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(File::create(&path)?);
    w.write_record(header())?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;

    let opts = solver_options(cfg);
    let mut computed = 0;
    for inst in instances(cfg) {
        let todo: Vec<Method> = cfg
            .methods
            .iter()
            .copied()
            .filter(|m| !done.contains(&AccuracyRow::blank(&inst, *m).key()))
            .collect();
        if todo.is_empty() {
            continue;
        }
        for row in evaluate_instance(&inst, &todo, &opts) {
            w.serialize(&row)?;
            on_row(&row);
            rows.push(row);
            computed += 1;
        }
        w.flush()?;
    }
    Ok(SuiteOutcome { rows, computed })
}
