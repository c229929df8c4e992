use std::fs;
use std::process::Command;

use mpsvd::{HigherMatrix, Method, WorkingMatrix};
use mpsvd_harness::accuracy::{read_rows, U};
use mpsvd_harness::gen::read_metadata;
use mpsvd_harness::{run_accuracy_suite, run_perf_suite, SuiteConfig};
use tempfile::tempdir;

fn tiny(out: std::path::PathBuf) -> SuiteConfig {
    SuiteConfig {
        n: 8,
        m_ratios: vec![8],
        kappa_b: vec![1.0],
        kappa_d: vec![1.0],
        matrix_ids: vec![1],
        out_path: Some(out),
        ..SuiteConfig::default()
    }
}

fn small(out: std::path::PathBuf) -> SuiteConfig {
    SuiteConfig {
        n: 8,
        m_ratios: vec![16],
        kappa_b: vec![10.0, 1e4],
        kappa_d: vec![1.0, 1e6],
        matrix_ids: vec![2, 9, 16],
        out_path: Some(out),
        ..SuiteConfig::default()
    }
}

fn mpsvd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mpsvd"))
}

#[test]
fn perfectly_conditioned_suite() {
    let dir = tempdir().unwrap();
    let out = run_accuracy_suite(&tiny(dir.path().join("a.csv"))).unwrap();
    assert_eq!(out.rows.len(), Method::ALL.len());
    for r in &out.rows {
        assert!(r.error.is_empty(), "{}", r.error);
        assert!(
            r.max_rel_sv_err.unwrap() <= 1e3 * U,
            "{}: {:?}",
            r.method,
            r.max_rel_sv_err
        );
    }
    assert_eq!(out.exit_code(), 0);
}

#[test]
fn suite_is_deterministic_and_restartable() {
    let dir = tempdir().unwrap();
    let first = run_accuracy_suite(&small(dir.path().join("one.csv"))).unwrap();
    let second = run_accuracy_suite(&small(dir.path().join("two.csv"))).unwrap();
    let strip = |rows: &[mpsvd_harness::AccuracyRow]| {
        rows.iter().map(|r| r.without_timing()).collect::<Vec<_>>()
    };
    assert_eq!(strip(&first.rows), strip(&second.rows));
    assert_eq!(first.rows.len(), 12 * 4);

    // cut the file mid-record and resume
    let path = dir.path().join("one.csv");
    let text = fs::read_to_string(&path).unwrap();
    fs::write(&path, &text[..text.len() * 2 / 3]).unwrap();
    let kept = read_rows(&path).unwrap().len();
    assert!(kept > 0 && kept < first.rows.len());
    let resumed = run_accuracy_suite(&small(path.clone())).unwrap();
    assert_eq!(resumed.computed, first.rows.len() - kept);
    assert_eq!(strip(&resumed.rows), strip(&first.rows));
    assert_eq!(strip(&read_rows(&path).unwrap()), strip(&first.rows));

    // nothing left to do
    let again = run_accuracy_suite(&small(path)).unwrap();
    assert_eq!(again.computed, 0);
}

#[test]
fn thread_count_does_not_change_numbers() {
    let dir = tempdir().unwrap();
    let runs: Vec<_> = [1, 2, 4]
        .into_iter()
        .map(|t| {
            let cfg = SuiteConfig {
                threads: t,
                ..small(dir.path().join(format!("t{t}.csv")))
            };
            run_accuracy_suite(&cfg)
                .unwrap()
                .rows
                .iter()
                .map(|r| r.without_timing())
                .collect::<Vec<_>>()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn perf_phases_partition_total() {
    let dir = tempdir().unwrap();
    let cfg = SuiteConfig {
        n: 16,
        m_ratios: vec![32],
        out_path: Some(dir.path().join("p.csv")),
        ..SuiteConfig::default()
    };
    let rows = run_perf_suite(&cfg).unwrap();
    assert_eq!(rows.len(), Method::ALL.len());
    for r in &rows {
        let total = r.total_s.unwrap();
        let sum = r.qr_s.unwrap()
            + r.gram_s.unwrap()
            + r.eigen_s.unwrap()
            + r.compute_u_s.unwrap()
            + r.overlap_s.unwrap();
        assert!((sum - r.phase_sum_s.unwrap()).abs() <= 1e-9);
        // the outer clock only adds call overhead
        assert!(
            sum <= total + 1e-6 && total - sum <= 1e-3_f64.max(0.05 * total),
            "{}: {sum} vs {total}",
            r.method
        );
        assert_eq!(r.syncs, if r.method == "qr-baseline" { 0 } else { 1 });
    }
    let qr = rows.iter().find(|r| r.method == "qr-baseline").unwrap();
    assert_eq!(qr.ratio_to_qr, Some(1.0));
    assert_eq!(
        csv::Reader::from_path(dir.path().join("p.csv"))
            .unwrap()
            .records()
            .count(),
        rows.len()
    );
}

#[test]
fn perf_numbers_ignore_threads() {
    let dir = tempdir().unwrap();
    let rows: Vec<_> = [1, 2, 4]
        .into_iter()
        .map(|t| {
            let cfg = SuiteConfig {
                n: 16,
                m_ratios: vec![32],
                threads: t,
                runs: 1,
                out_path: Some(dir.path().join(format!("p{t}.csv"))),
                ..SuiteConfig::default()
            };
            run_perf_suite(&cfg)
                .unwrap()
                .iter()
                .map(|r| r.without_timing())
                .collect::<Vec<_>>()
        })
        .collect();
    assert_eq!(rows[0], rows[1]);
    assert_eq!(rows[0], rows[2]);
}

#[test]
fn gen_round_trip() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("g");
    let status = mpsvd()
        .args([
            "gen",
            "--n",
            "16",
            "--m-ratio",
            "8",
            "--kappa-b",
            "1e3",
            "--kappa-d",
            "1e6",
        ])
        .args(["--matrix-ids", "3", "--seed", "5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let a = WorkingMatrix::load(out.join("A.txt")).unwrap();
    let spec = mpsvd::TestMatrixSpec {
        m: 128,
        n: 16,
        kappa_d: 1e6,
        kappa_b: 1e3,
        matrix_id: 3,
        seed: 5,
    };
    let p = mpsvd::build_problem::<f32>(&spec).unwrap();
    assert_eq!(a.shape(), (128, 16));
    assert!(a
        .as_slice()
        .iter()
        .zip(p.a.as_slice())
        .all(|(x, y)| x.to_bits() == y.to_bits()));
    let sigma = HigherMatrix::load(out.join("sigma_ref.txt")).unwrap();
    assert_eq!(sigma.as_slice(), p.sigma_ref.as_slice());
    assert_eq!(
        HigherMatrix::load(out.join("D.txt")).unwrap().shape(),
        (16, 1)
    );
    assert_eq!(
        HigherMatrix::load(out.join("B.txt")).unwrap().shape(),
        (128, 16)
    );
    let meta = read_metadata(&out.join("meta.txt")).unwrap();
    let realized: f64 = meta
        .iter()
        .find(|(k, _)| k == "realized_kappa_b")
        .unwrap()
        .1
        .parse()
        .unwrap();
    assert!((0.5e3..=2e3).contains(&realized), "{realized}");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("g");
    let code = |args: &[&str]| {
        mpsvd()
            .args(args)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap()
            .code()
    };
    assert_eq!(
        code(&[
            "gen",
            "--matrix-ids",
            "17",
            "--kappa-b",
            "10",
            "--kappa-d",
            "1"
        ]),
        Some(2)
    );
    assert_eq!(
        code(&[
            "gen",
            "--kappa-b",
            "10,100",
            "--kappa-d",
            "1",
            "--matrix-ids",
            "1"
        ]),
        Some(2)
    );
    assert_eq!(code(&["accuracy", "--eigensolver", "lapack"]), Some(2));
    assert_eq!(code(&["accuracy", "--n", "1"]), Some(2));
    assert_eq!(code(&["accuracy", "--bogus"]), Some(2));
    assert_eq!(
        mpsvd_harness::cli::run(["mpsvd", "perf", "--matrix-ids", "0"]),
        2
    );
    assert!(!out.exists());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempdir().unwrap();
    let conf = dir.path().join("suite.conf");
    fs::write(&conf, "n = 8\nm_ratio = 8\nkappa_b = 10\nkappa_d = 1, 1e8\nmatrix_ids = 4\neigensolvers = gram-chol-svd\n").unwrap();
    let csv_path = dir.path().join("acc.csv");
    let status = mpsvd()
        .args(["accuracy", "--config"])
        .arg(&conf)
        .args([
            "--eigensolver",
            "twosided-jacobi",
            "--eigensolver",
            "gram-chol-svd",
            "--out",
        ])
        .arg(&csv_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let rows = read_rows(&csv_path).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows
        .iter()
        .all(|r| r.n == 8 && r.m == 64 && r.matrix_id == 4));
    assert_eq!(rows[0].method, "twosided-jacobi");
    assert_eq!(rows[1].method, "gram-chol-svd");
    assert!(rows[1].agree_twosided.is_some());
}
