use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const STATIC: &str = r#"{
  "payoffs": {"theta1_s": 0.7, "theta1_l": 0.3, "theta2_s": 0.4, "theta2_l": 1.0, "x1": 1.0, "x2": 1.0},
  "oracle": {"grid_n": 501, "constraint": "at_least"}
}"#;

const GROWTH: &str = r#"{
  "growth": {"beta": 0.5, "beta_s": 1.2, "beta_l": 2.0, "eta": 0.05, "a0": 0.9, "periods": 5}
}"#;

fn realloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_realloc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scenario(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn solve_interior_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "s.json", STATIC);
    let o = realloc(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--delta-l",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["regime"], "interior");
    assert!((v["lambda_s"].as_f64().unwrap() - 0.222138).abs() < 1e-6);
    assert!((v["gamma"].as_f64().unwrap() - 0.45).abs() < 1e-12);
}

#[test]
fn infeasible_shock_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "s.json", STATIC);
    let cfg = cfg.to_str().unwrap();
    let o = realloc(&["solve", "--config", cfg, "--delta-l", "0.25"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["regime"], "infeasible");
    let o = realloc(&[
        "oracle",
        "--config",
        cfg,
        "--delta-l",
        "0.25",
        "--grid",
        "101",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(json(&o)["oracle"].is_null());
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(
        dir.path(),
        "bad.json",
        "{\n  \"payoffs\": {\n    \"theta1_s\": ,\n  }\n}",
    );
    let o = realloc(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--delta-l",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn missing_blocks_and_bad_values_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let growth_only = scenario(dir.path(), "g.json", GROWTH);
    let o = realloc(&[
        "solve",
        "--config",
        growth_only.to_str().unwrap(),
        "--delta-l",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("payoffs"));

    let violated = scenario(
        dir.path(),
        "v.json",
        r#"{"payoffs": {"theta1_s": 0.2, "theta1_l": 0.3, "theta2_s": 0.4, "theta2_l": 1.0, "x1": 1.0, "x2": 1.0}}"#,
    );
    let o = realloc(&[
        "solve",
        "--config",
        violated.to_str().unwrap(),
        "--delta-l",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(1));

    let unknown = scenario(
        dir.path(),
        "u.json",
        r#"{"growth": {"beta": 0.5}, "extra": 1}"#,
    );
    let o = realloc(&["dynamics", "--config", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let o = realloc(&[
        "solve",
        "--config",
        "/nonexistent/scenario.json",
        "--delta-l",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(realloc(&["sweep"]).status.code(), Some(1));
    assert_eq!(realloc(&["frobnicate"]).status.code(), Some(1));
    let help = realloc(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("Exit codes"));
}

#[test]
fn sweep_steps_count_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "s.json", STATIC);
    let cfg = cfg.to_str().unwrap();
    let o = realloc(&[
        "sweep", "--config", cfg, "--from", "0", "--to", "0.1", "--steps", "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "delta_l,regime,lambda_s,lambda_l,liquidity,objective"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.000000,no_shock,"));
    assert!(lines[2].starts_with("0.100000,interior,"));

    assert_eq!(
        realloc(&["sweep", "--config", cfg, "--from", "0", "--to", "0.1", "--steps", "1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn sweep_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "s.json", STATIC);
    let out = dir.path().join("sweep.csv");
    let o = realloc(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--from",
        "0",
        "--to",
        "0.25",
        "--steps",
        "26",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().count(), 27);
    assert!(text.contains(",corner_full_coercion,"));
    assert!(text.contains(",infeasible,"));
}

#[test]
fn dynamics_fixture_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "g.json", GROWTH);
    let o = realloc(&["dynamics", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[0].starts_with("0,0.900000,"));
    assert!(rows[0].contains(",-0.257576,"));
    assert!(rows[1].starts_with("1,0.668182,"));
    assert!(text.ends_with("# stop: horizon reached\n"));
}

#[test]
fn dynamics_outside_gamma_window_emits_no_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(
        dir.path(),
        "g.json",
        r#"{"growth": {"beta": 0.5, "beta_s": 1.2, "beta_l": 2.0, "eta": 0.05, "a0": 0.55, "periods": 5}}"#,
    );
    let o = realloc(&["dynamics", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("# stop: gamma domain at t=0"));
}

#[test]
fn compare_reports_coercion_growth() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "g.json", GROWTH);
    let o = realloc(&[
        "compare",
        "--config",
        cfg.to_str().unwrap(),
        "--from",
        "0.8",
        "--to",
        "0.9",
        "--steps",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# baseline: closed_form\n"));
    let row = text.lines().find(|l| l.starts_with("0.800000,")).unwrap();
    assert_eq!(row.split(',').nth(2), Some("-0.250000"));
}

#[test]
fn oracle_gap_on_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "s.json", STATIC);
    let o = realloc(&[
        "oracle",
        "--config",
        cfg.to_str().unwrap(),
        "--delta-l",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let eps = v["epsilon_grid"].as_f64().unwrap();
    let gap = v["gap"].as_f64().unwrap();
    assert_eq!(v["grid_n"], 501);
    assert_eq!(v["constraint"], "at_least");
    assert!((gap - 0.01358).abs() <= eps, "gap {gap} eps {eps}");
    assert_eq!(v["oracle_strictly_better"], gap > eps);
}

#[test]
fn mode_flag_overrides_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = scenario(dir.path(), "s.json", STATIC);
    let cfg = cfg.to_str().unwrap();
    let o = realloc(&[
        "solve",
        "--config",
        cfg,
        "--delta-l",
        "0.198",
        "--mode",
        "paper-literal",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["mode"], "paper_literal");
    let o = realloc(&[
        "solve",
        "--config",
        cfg,
        "--delta-l",
        "0.1",
        "--precision",
        "full",
    ]);
    let s = json(&o)["lambda_s"].as_f64().unwrap();
    assert!(s.to_string().len() > 10);
}
