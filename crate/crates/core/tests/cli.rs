use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use moserlab::cli::{exit_code, run, EXIT_CHECK, EXIT_CONFIG, EXIT_FAILURE, EXIT_OK};
use moserlab::Error;

fn manifest(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn moserlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moserlab")).args(args).output().unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(manifest("tests/golden").join(name)).unwrap()
}

#[test]
fn ledger_matches_golden() {
    let out = moserlab(&["ledger", "--N", "2", "--q", "4", "--beta0", "1", "--alpha", "1"]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, golden("ledger_n2_q4.txt"));
    for line in ["chi = 1.5", "alpha0 = 1.5", "r = 2.66666666667", "final_exponent = 5"] {
        assert!(text.lines().any(|l| l == line), "{line}");
    }
}

#[test]
fn demo_diagnose_check_passes_and_matches_golden() {
    let dir = tempfile::tempdir().unwrap();
    let config = manifest("configs/demo.toml");
    let out = moserlab(&[
        "diagnose",
        "--config",
        config.to_str().unwrap(),
        "--check",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, golden("diagnose_demo.txt"));
    assert!(text.contains("l1_check:") && text.contains("pass = true"));
    assert_eq!(text.matches("interpolation_check:").count(), 2);
    assert!(!text.contains("pass = false"));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("i,p,norm,ratio\n"));
    let ledger = std::fs::read_to_string(dir.path().join("ledger.txt")).unwrap();
    assert!(ledger.contains("lambda = 0.9"));
}

#[test]
fn missing_config_is_exit_1() {
    let out = moserlab(&["sweep", "--config", "missing.cfg"]);
    assert_eq!(out.status.code(), Some(EXIT_CONFIG));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.cfg"));
}

#[test]
fn usage_errors_are_exit_1_on_stderr() {
    for args in [&["sweep", "--bogus"][..], &["frobnicate"], &[], &["ledger", "--N", "two"]] {
        let out = moserlab(args);
        assert_eq!(out.status.code(), Some(EXIT_CONFIG), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn help_exits_0_without_side_effects() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    for sub in ["solve", "diagnose", "ledger", "sweep", "convergence"] {
        let out = moserlab(&[sub, "--help", "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(EXIT_OK), "{sub}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"));
    }
    assert_eq!(moserlab(&["--help"]).status.code(), Some(EXIT_OK));
    assert!(!out_dir.exists());
}

#[test]
fn subcritical_q_is_a_configuration_error() {
    assert_eq!(run(["moserlab", "ledger", "--N", "2", "--q", "2"]), EXIT_CONFIG);
}

#[test]
fn solver_failure_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(manifest("configs/demo.toml")).unwrap()
        + "\n[solver]\ntolerance = 1e-12\nmax_iterations = 1\n";
    let path = dir.path().join("starved.toml");
    std::fs::write(&path, text).unwrap();
    assert_eq!(run(["moserlab", "solve", "--config", path.to_str().unwrap()]), EXIT_FAILURE);
}

#[test]
fn inadmissible_problem_is_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(manifest("configs/demo.toml"))
        .unwrap()
        .replace("lambda = 0.9", "lambda = 5.0");
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, text).unwrap();
    assert_eq!(run(["moserlab", "solve", "--config", path.to_str().unwrap()]), EXIT_CONFIG);
}

#[test]
fn solve_writes_solution() {
    let dir = tempfile::tempdir().unwrap();
    let code = run([
        "moserlab",
        "solve",
        "--config",
        manifest("configs/demo.toml").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--threads",
        "2",
    ]);
    assert_eq!(code, EXIT_OK);
    let config = moserlab::config::Config::load(&manifest("configs/demo.toml")).unwrap();
    let phi = moserlab::solver::read_solution_csv(&config.grid().unwrap(), &dir.path().join("solution.csv")).unwrap();
    assert_eq!(phi.slice_count(), 65);
    assert!(phi.max_value() > 0.0);
}

#[test]
fn sweep_writes_fixed_outputs_and_eps_override() {
    let dir = tempfile::tempdir().unwrap();
    let code = run([
        "moserlab",
        "sweep",
        "--config",
        manifest("configs/sweep_small.toml").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--eps-list",
        "0.25,0.2,0.15,0.125,0.1875",
        "--check",
    ]);
    assert_eq!(code, EXIT_OK);
    for name in ["sweep.csv", "sweep.svg", "trace.csv", "ledger.txt"] {
        assert!(dir.path().join(name).is_file(), "{name}");
    }
    let rows = moserlab::experiments::read_csv(&dir.path().join("sweep.csv")).unwrap();
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    assert_eq!(eps, vec![0.25, 0.2, 0.1875, 0.15, 0.125]);
}

#[test]
fn unresolved_eps_is_exit_1() {
    let code = run([
        "moserlab",
        "sweep",
        "--config",
        manifest("configs/sweep_small.toml").to_str().unwrap(),
        "--eps-list",
        "0.25,0.01",
    ]);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn convergence_check_passes() {
    assert_eq!(run(["moserlab", "convergence", "--N", "1", "--check"]), EXIT_OK);
}

#[test]
fn exit_code_mapping() {
    assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
    assert_eq!(exit_code(&Error::Domain("x".into())), EXIT_CONFIG);
    assert_eq!(exit_code(&Error::EmptySweep), EXIT_CONFIG);
    assert_eq!(
        exit_code(&Error::Solver {
            step: 1,
            residual: 1.0,
            iterations: 3
        }),
        EXIT_FAILURE
    );
    assert_eq!(exit_code(&Error::Consistency("x".into())), EXIT_FAILURE);
    assert_ne!(EXIT_CHECK, EXIT_FAILURE);
}
