//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mpsvd::{Method, TestMatrixSpec};

use crate::accuracy::run_accuracy_suite;
use crate::config::{parse_list, SuiteConfig};
use crate::error::{HarnessError, Result};
use crate::gen::gen_command;
use crate::perf::run_perf_suite;

#[derive(Debug, Parser)]
#[command(
    name = "mpsvd",
    version,
    about = "Mixed precision thin SVD experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one test problem (A, B, D, sigma_ref, metadata).
    Gen(SuiteArgs),
    /// Accuracy suite: one CSV row per (instance, method).
    Accuracy(SuiteArgs),
    /// Timing breakdown per method and m/n ratio.
    Perf(SuiteArgs),
}

#[derive(Debug, Args, Default)]
pub struct SuiteArgs {
    /// key=value config file; flags given here override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// comma list; m = m_ratio · n
    #[arg(long = "m-ratio")]
    pub m_ratio: Option<String>,
    /// comma list of κ(B)
    #[arg(long = "kappa-b")]
    pub kappa_b: Option<String>,
    /// comma list of κ(D)
    #[arg(long = "kappa-d")]
    pub kappa_d: Option<String>,
    /// comma list of ids in 1..=16
    #[arg(long = "matrix-ids")]
    pub matrix_ids: Option<String>,
    /// twosided-jacobi | gram-chol-svd | onesided-jacobi-gram | qr-baseline
    #[arg(long = "eigensolver")]
    pub eigensolver: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// row blocks of the partitioned Gram product
    #[arg(long = "gram-blocks")]
    pub gram_blocks: Option<usize>,
    /// timed runs per perf measurement
    #[arg(long)]
    pub runs: Option<usize>,
    /// output file (accuracy, perf) or directory (gen)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SuiteArgs {
    pub fn to_config(&self) -> Result<SuiteConfig> {
        let mut cfg = SuiteConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        let lists = [
            ("m_ratio", &self.m_ratio),
            ("kappa_b", &self.kappa_b),
            ("kappa_d", &self.kappa_d),
            ("matrix_ids", &self.matrix_ids),
        ];
        for (key, value) in lists {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if !self.eigensolver.is_empty() {
            let mut methods = Vec::new();
            for e in &self.eigensolver {
                methods.extend(parse_list::<Method>("eigensolver", e)?);
            }
            cfg.methods = methods;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.threads {
            cfg.threads = t;
        }
        if let Some(b) = self.gram_blocks {
            cfg.gram_blocks = b;
        }
        if let Some(r) = self.runs {
            cfg.runs = r;
        }
        if let Some(o) = &self.out {
            cfg.out_path = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn single<T: Copy>(name: &str, v: &[T]) -> Result<T> {
    match v {
        [x] => Ok(*x),
        _ => Err(HarnessError::Usage(format!("gen takes exactly one {name}"))),
    }
}

fn gen_spec(cfg: &SuiteConfig) -> Result<TestMatrixSpec> {
    Ok(TestMatrixSpec {
        m: single("m_ratio", &cfg.m_ratios)? * cfg.n,
        n: cfg.n,
        kappa_d: single("kappa_d", &cfg.kappa_d)?,
        kappa_b: single("kappa_b", &cfg.kappa_b)?,
        matrix_id: single("matrix id", &cfg.matrix_ids)?,
        seed: cfg.seed,
    })
}

/// Runs a parsed command and returns the process exit code.
pub fn execute(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Gen(args) => {
            let cfg = args.to_config()?;
            let dir = cfg.out_or("gen");
            let p = gen_command(&gen_spec(&cfg)?, &dir)?;
            println!(
                "wrote {} (realized kappa_b {:.6e}, kappa_a {:.6e})",
                dir.display(),
                p.realized_kappa_b,
                p.realized_kappa_a
            );
            Ok(0)
        }
        Command::Accuracy(args) => {
            let cfg = args.to_config()?;
            let outcome = run_accuracy_suite(&cfg)?;
            println!(
                "{} rows ({} computed), {} bound failures, {} errors -> {}",
                outcome.rows.len(),
                outcome.computed,
                outcome.bound_failures(),
                outcome.errors(),
                cfg.out_or("accuracy.csv").display()
            );
            Ok(outcome.exit_code())
        }
        Command::Perf(args) => {
            let cfg = args.to_config()?;
            let rows = run_perf_suite(&cfg)?;
            for r in &rows {
                match (r.total_s, r.ratio_to_qr) {
                    (Some(t), Some(q)) => println!(
                        "m/n={:<5} {:<22} {:>10.4}s  x{:.3} of qr",
                        r.m_ratio, r.method, t, q
                    ),
                    (Some(t), None) => {
                        println!("m/n={:<5} {:<22} {:>10.4}s", r.m_ratio, r.method, t)
                    }
                    _ => println!("m/n={:<5} {:<22} error: {}", r.m_ratio, r.method, r.error),
                }
            }
            Ok(if rows.iter().any(|r| !r.error.is_empty()) {
                3
            } else {
                0
            })
        }
    }
}

/// Parses `args` and runs; usage errors print to stderr and give 2.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code as u8;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
