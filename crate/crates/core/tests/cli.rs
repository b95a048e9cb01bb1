mod common;

use std::process::{Command, Output};

use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockmilp"))
        .args(args)
        .env_remove("BLOCKMILP_SOLVER_CMD")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gen_then_solve_converges() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inv.json");
    let path_s = path.to_str().unwrap();
    let o = bin(&["gen", "--family", "investment", "--S", "2", "--T", "I", "--upper", "2", "-o", path_s]);
    assert_eq!(o.status.code(), Some(0));
    let p = blockmilp::model::TwoBlockMilp::load(&path).unwrap();
    assert_eq!(p, common::investment(blockmilp::instances::TChoice::Identity));

    let o = bin(&["solve", "--problem", path_s, "--params", "1,1.1,100,50,200,200"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rep["status"], "converged");
    assert_eq!(rep["parameters"]["params"], "1,1.1,100,50,200,200");
    let p_star = common::p_star(&p);
    assert!((rep["objective"].as_f64().unwrap() - p_star).abs() <= 1e-6 * p_star.abs());
}

#[test]
fn iteration_limit_exits_two() {
    let o = bin(&[
        "solve", "--family", "random", "--blocks", "2", "--dim", "4", "--int-count", "3", "--eq-rows", "1",
        "--copies", "1", "--slack", "1", "--alg", "admm", "--iter-limit", "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let rep: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rep["status"], "iteration-limit");
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(bin(&["solve", "--problem", "/nonexistent/p.json"]).status.code(), Some(64));
    assert_eq!(bin(&["solve"]).status.code(), Some(64));
    assert_eq!(bin(&["solve", "--family", "sslp", "--params", "1,2,3"]).status.code(), Some(64));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(bin(&["gen"]).status.code(), Some(64));
    assert_eq!(bin(&["reproduce", "no-such-table"]).status.code(), Some(64));
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_problem_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"format\":\"blockmilp-v1\",\"c\":[1]}").unwrap();
    let o = bin(&["solve", "--problem", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn csv_output_and_append() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("runs.csv");
    let args = [
        "solve", "--family", "sslp", "--servers", "2", "--clients", "2", "--scenarios", "2", "--seed", "7",
        "--format", "csv", "--csv", csv.to_str().unwrap(),
    ];
    for _ in 0..2 {
        let o = bin(&args);
        assert_eq!(o.status.code(), Some(0));
        let out = stdout(&o);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("instance,algorithm,"));
        assert_eq!(lines[1].split(',').count(), 9);
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    // header once, then one row per run
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn config_file_and_flags_compose() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"algorithm":"admm","iter_limit":1}"#).unwrap();
    let report = dir.path().join("rep.json");
    let o = bin(&[
        "solve", "--family", "investment", "--S", "2", "--upper", "2", "--config", cfg.to_str().unwrap(),
        "--report", report.to_str().unwrap(), "--iter-limit", "500", "--alg", "alm",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["parameters"]["algorithm"], "alm");
    assert_eq!(rep["parameters"]["iter_limit"], 500);
    std::fs::write(&cfg, r#"{"bogus":1}"#).unwrap();
    let o = bin(&["solve", "--family", "sslp", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn oracle_subcommand() {
    let o = bin(&["oracle", "--family", "investment", "--S", "3", "--op", "lattice"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() + 190.0 / 3.0).abs() <= 1e-9);
    let o = bin(&["oracle", "--family", "investment", "--S", "2", "--upper", "2", "--op", "dual", "--lambda", "1,2"]);
    assert_eq!(o.status.code(), Some(64));
}
