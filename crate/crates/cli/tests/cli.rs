use std::path::Path;
use std::process::Command;

use orlicz_cli::run_cli;
use serde_json::Value;

fn run(args: &[&str], out: &Path) -> i32 {
    let mut argv = vec!["orlicz"];
    argv.extend_from_slice(args);
    argv.extend_from_slice(&["--output-dir", out.to_str().unwrap()]);
    run_cli(argv)
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

/// `(x, value)` rows of a 1D `u.csv`.
fn read_field(path: &Path) -> Vec<(f64, f64)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("node_index,x,value"));
    lines
        .map(|l| {
            let cols: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
            (cols[1], cols[2])
        })
        .collect()
}

#[test]
fn catalog_lists_operators() {
    let out = Command::new(env!("CARGO_BIN_EXE_orlicz")).arg("catalog").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["power:p=", "logarithmic", "custom:", "powerlog:m=", "zero"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn logarithmic_solve_writes_solution_and_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&["solve-linear", "--operator", "logarithmic", "--mesh", "1d:128", "--f", "const:1"], dir.path());
    assert_eq!(code, 0);
    let u = read_field(&dir.path().join("u.csv"));
    let (x, v) = u[64];
    assert_eq!(x, 0.5);
    assert!((v - (0.5f64.exp() - 1.5)).abs() <= 1e-3, "{v}");
    let rep = report(dir.path());
    assert_eq!(rep["status"], "ok");
    assert_eq!(rep["results"]["s_plus"]["pass"], true);
    let ladder = std::fs::read_to_string(dir.path().join("ladder.csv")).unwrap();
    assert_eq!(ladder.lines().count(), 12);
}

#[test]
fn sublinear_nonlinearity_fails_g3() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&["solve-superlinear", "--nonlinearity", "power:q=1.2"], dir.path());
    assert_eq!(code, 2);
    let rep = report(dir.path());
    assert_eq!(rep["status"], "hypothesis_failure");
    assert_eq!(rep["error"]["detail"]["hypothesis"], "(g3)");
}

#[test]
fn nonreflexive_eps_zero_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(
        &["solve-superlinear", "--operator", "logarithmic", "--nonlinearity", "power:q=4", "--eps", "0"],
        dir.path(),
    );
    assert_eq!(code, 2);
    assert_eq!(report(dir.path())["error"]["detail"]["hypothesis"], "(phi3)'");
}

#[test]
fn nonconvergence_writes_best_iterate() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&["solve-linear", "--operator", "power:p=3", "--max-iters", "1", "--tol", "1e-14"], dir.path());
    assert_eq!(code, 3);
    assert!(dir.path().join("u.csv").exists());
    assert_eq!(report(dir.path())["status"], "nonconvergence");
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_cli(["orlicz", "solve-linear", "--bogus"]), 1);
    assert_eq!(run(&["solve-linear", "--mesh", "3d:4"], dir.path()), 1);
    assert_eq!(run(&["solve-linear", "--operator", "cubic"], dir.path()), 1);
    assert_eq!(report(dir.path())["status"], "usage_error");
    assert_eq!(run_cli(["orlicz", "--help"]), 0);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "operator = \"power:p=3\"\n\n[mesh]\ndim = 1\nresolution = 16\n").unwrap();
    let code = run(&["solve-linear", "--config", cfg.to_str().unwrap(), "--operator", "power:p=2"], dir.path());
    assert_eq!(code, 0);
    let rep = report(dir.path());
    assert_eq!(rep["config"]["operator"], "power:p=2");
    assert_eq!(rep["config"]["mesh"]["resolution"], 16);
    let u = read_field(&dir.path().join("u.csv"));
    assert!((u[8].1 - 0.125).abs() < 1e-12);
}

#[test]
fn superlinear_pair_is_odd() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(
        &["solve-superlinear", "--nonlinearity", "power:q=4", "--variant", "pair", "--mesh", "1d:48"],
        dir.path(),
    );
    assert_eq!(code, 0);
    let up = read_field(&dir.path().join("u_plus.csv"));
    let um = read_field(&dir.path().join("u_minus.csv"));
    for (a, b) in up.iter().zip(&um) {
        assert!((a.1 + b.1).abs() <= 1e-6);
    }
    assert!(dir.path().join("sweeps_plus.csv").exists());
}

#[test]
fn verify_skips_checks_outside_their_hypotheses() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(&["verify", "--operator", "power:p=2", "--mesh", "1d:32"], dir.path());
    assert_eq!(code, 0);
    let rep = report(dir.path());
    assert!(rep["results"]["moser"]["skipped"].is_string());
    assert_eq!(rep["results"]["poincare"]["passed"], true);
    assert_eq!(rep["results"]["convergence"]["passed"], true);
    assert!(dir.path().join("rates.csv").exists());
}

#[test]
fn runs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["solve-superlinear", "--nonlinearity", "powerlog:m=2", "--mesh", "1d:32"];
    assert_eq!(run(&args, a.path()), 0);
    assert_eq!(run(&args, b.path()), 0);
    for name in ["u.csv", "sweeps.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let run_with = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_orlicz"))
            .args(["solve-superlinear", "--nonlinearity", "power:q=4", "--mesh", "1d:32", "--output-dir"])
            .arg(dir.path())
            .env("ORLICZ_SOLVER_THREADS", threads)
            .status()
            .unwrap();
        assert!(out.success());
        std::fs::read(dir.path().join("u.csv")).unwrap()
    };
    assert_eq!(run_with("1"), run_with("4"));
}

#[test]
fn sample_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = orlicz_cli::RunConfig::from_file(&path).unwrap();
            cfg.validate().unwrap();
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
