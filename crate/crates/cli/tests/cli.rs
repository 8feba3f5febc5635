//! End-to-end tests of the command-line interface.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_smoothrank"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_tiny(dir: &Path) -> PathBuf {
    let path = dir.join("tiny.svml");
    fs::write(&path, "+1 1:1.0 3:2.0\n-1 2:1.5\n+1 1:0.5 2:-0.5\n-1 3:-1.0\n").unwrap();
    path
}

/// Deterministic 60-example two-class set with overlap.
fn write_noisy(dir: &Path) -> PathBuf {
    let mut state = 0x2545F4914F6CDD1Du64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut text = String::new();
    for i in 0..60 {
        let label = if i % 3 == 0 { 1.0 } else { -1.0 };
        let noisy = if next() < 0.2 { -label } else { label };
        text.push_str(if noisy > 0.0 { "+1" } else { "-1" });
        for k in 0..5 {
            let v = label * (0.5 - 0.2 * k as f64) + 1.2 * (next() - 0.5);
            if v != 0.0 {
                text.push_str(&format!(" {}:{:.6}", k + 1, v));
            }
        }
        text.push('\n');
    }
    let path = dir.join("noisy.svml");
    fs::write(&path, text).unwrap();
    path
}

fn trace_without_cpu(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .map(|line| {
            let mut cols: Vec<&str> = line.split(',').collect();
            if cols.len() >= 2 {
                cols.remove(1);
            }
            cols.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn train_writes_trace_with_contract_header() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_tiny(dir.path());
    let trace = dir.path().join("trace.csv");
    let model = dir.path().join("model.txt");
    let out = run(&[
        "train", "--loss", "prbep", "--solver", "lbfgs",
        "--train", data.to_str().unwrap(),
        "--lambda", "1", "--epsilon", "0.001",
        "--trace", trace.to_str().unwrap(),
        "--model", model.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("iter,cpu_ms,primal_J,smooth_J,test_metric\n"));
    let first_row = text.lines().nth(1).unwrap();
    assert!(first_row.starts_with("0,"));
    assert!(model.exists());
}

#[test]
fn missing_train_flag_is_a_usage_error() {
    let out = run(&["train", "--loss", "prbep", "--solver", "lbfgs", "--lambda", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("--train"), "stderr: {err}");
    assert!(err.to_lowercase().contains("usage"), "stderr: {err}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["train", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unreadable_file_is_a_runtime_error() {
    let out = run(&[
        "train", "--loss", "prbep", "--solver", "lbfgs",
        "--train", "/nonexistent/data.svml", "--lambda", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn identical_flags_give_identical_traces_modulo_cpu() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_noisy(dir.path());
    let mut traces = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let trace = dir.path().join(name);
        let model = dir.path().join(format!("{name}.model"));
        let out = run(&[
            "train", "--loss", "rocarea", "--solver", "lbfgs",
            "--train", data.to_str().unwrap(),
            "--test", data.to_str().unwrap(),
            "--lambda", "0.1",
            "--trace", trace.to_str().unwrap(),
            "--model", model.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        traces.push(trace_without_cpu(&trace));
    }
    assert_eq!(traces[0], traces[1]);
}

#[test]
fn eval_reproduces_the_final_trace_test_metric() {
    let dir = tempfile::tempdir().unwrap();
    let train = write_noisy(dir.path());
    let test = write_tiny(dir.path());
    let trace = dir.path().join("trace.csv");
    let model = dir.path().join("model.txt");
    for (loss, solver) in [("prbep", "bundle"), ("rocarea", "lbfgs")] {
        let out = run(&[
            "train", "--loss", loss, "--solver", solver,
            "--train", train.to_str().unwrap(),
            "--test", test.to_str().unwrap(),
            "--lambda", "0.5",
            "--trace", trace.to_str().unwrap(),
            "--model", model.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        let text = fs::read_to_string(&trace).unwrap();
        let last = text.lines().last().unwrap();
        let trace_metric: f64 = last.split(',').nth(4).unwrap().parse().unwrap();

        let out = run(&[
            "eval", "--loss", loss,
            "--model", model.to_str().unwrap(),
            "--test", test.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
        let text = stdout(&out);
        let metric_line = text.lines().find(|l| l.starts_with("metric ")).unwrap();
        let eval_metric: f64 = metric_line["metric ".len()..].parse().unwrap();
        assert_eq!(
            eval_metric.to_bits(),
            trace_metric.to_bits(),
            "{loss}/{solver}: eval metric {eval_metric} vs trace {trace_metric}"
        );
    }
}

#[test]
fn bundle_warns_when_mu_mult_is_passed() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_tiny(dir.path());
    let out = run(&[
        "train", "--loss", "prbep", "--solver", "bundle",
        "--train", data.to_str().unwrap(),
        "--lambda", "1", "--mu-mult", "100",
        "--trace", dir.path().join("t.csv").to_str().unwrap(),
        "--model", dir.path().join("m.txt").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("--mu-mult"), "stderr: {}", stderr(&out));
}

#[test]
fn compare_writes_summary_and_agreeing_finals() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_noisy(dir.path());
    let out_dir = dir.path().join("cmp");
    let out = run(&[
        "compare", "--loss", "prbep",
        "--train", data.to_str().unwrap(),
        "--lambda", "0.5", "--epsilon", "0.001",
        "--solvers", "lbfgs,bundle", "--mu-mults", "1",
        "--max-iter", "500", "--tol", "1e-8",
        "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows[0], "config,cpu_ms_to_target,final_primal_J,final_test_metric");
    assert_eq!(rows.len(), 3, "summary: {summary}");
    let j: Vec<f64> =
        rows[1..].iter().map(|r| r.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!((j[0] - j[1]).abs() <= 2e-3, "final objectives {j:?} disagree beyond 2 epsilon");
    assert!(out_dir.join("trace_lbfgs_mu1.csv").exists());
    assert!(out_dir.join("trace_bundle.csv").exists());
}

#[test]
fn compare_rejects_empty_solver_list() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_tiny(dir.path());
    let out = run(&[
        "compare", "--loss", "prbep",
        "--train", data.to_str().unwrap(),
        "--lambda", "1", "--solvers", ",",
        "--out-dir", dir.path().join("cmp").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
}

#[test]
fn eval_on_a_perfect_separator_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sep.svml");
    fs::write(&data, "+1 1:1\n+1 1:2\n-1 1:-1\n-1 1:-2\n").unwrap();
    let model = dir.path().join("model.txt");
    fs::write(&model, "1\n1.0\n").unwrap();
    let out = run(&[
        "eval", "--loss", "prbep",
        "--model", model.to_str().unwrap(),
        "--test", data.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("metric 1\n"), "stdout: {}", stdout(&out));
}

#[test]
fn eval_zero_model_gives_half_rocarea() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_tiny(dir.path());
    let model = dir.path().join("model.txt");
    fs::write(&model, "3\n0.0\n0.0\n0.0\n").unwrap();
    let out = run(&[
        "eval", "--loss", "rocarea",
        "--model", model.to_str().unwrap(),
        "--test", data.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("metric 0.5\n"), "stdout: {}", stdout(&out));
}

#[test]
fn eval_handles_test_features_beyond_the_model() {
    // Test data reaches feature 9; the 1-feature model scores it anyway.
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("wide.svml");
    fs::write(&data, "+1 1:1 9:4\n-1 1:-1 7:2\n").unwrap();
    let model = dir.path().join("model.txt");
    fs::write(&model, "1\n1.0\n").unwrap();
    let out = run(&[
        "eval", "--loss", "rocarea",
        "--model", model.to_str().unwrap(),
        "--test", data.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("metric 1\n"));
}

#[test]
fn eval_rejects_non_numeric_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_tiny(dir.path());
    let model = dir.path().join("model.txt");
    fs::write(&model, "2\n1.0\npotato\n").unwrap();
    let out = run(&[
        "eval", "--loss", "prbep",
        "--model", model.to_str().unwrap(),
        "--test", data.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn agm_solver_runs_from_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_tiny(dir.path());
    let out = run(&[
        "train", "--loss", "rocarea", "--solver", "agm",
        "--train", data.to_str().unwrap(),
        "--lambda", "1", "--max-iter", "2000", "--tol", "1e-6",
        "--trace", dir.path().join("t.csv").to_str().unwrap(),
        "--model", dir.path().join("m.txt").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("final_primal_J="));
}
