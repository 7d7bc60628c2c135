mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &str = r#"{
    "model": {"m_a": 1.0, "m_b": 0.4, "m_c": 0.3, "g": 0.05, "lambda_ff": 2.0},
    "grid": {"n_modes": 9, "dk": 0.25},
    "velocities": [0.5],
    "momenta": [0.0, 0.5]
}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_speedup-lab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p
}

fn run_config(sub: &str, text: &str, extra: &[&str]) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), text);
    let out = dir.path().join("out");
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--quiet"];
    args.extend_from_slice(extra);
    (run(&args), dir)
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    names
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["speedup", "--help"]).status.code(), Some(0));
    assert_eq!(run(&["speedup", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["speedup", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
}

#[test]
fn speedup_on_the_reference_config_writes_csv_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = common::reference_config_path();
    let o = run(&["speedup", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let files = listing(&out);
    assert!(files.contains(&"report.json".to_string()));
    for v in ["0.2", "0.5", "0.8"] {
        assert!(files.contains(&format!("V_v{v}.csv")), "{files:?}");
    }
    let r = report(dir.path());
    assert_eq!(r["command"], "speedup");
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    assert!(r["sign_convention"]["convention"].is_string());
    let csv = std::fs::read_to_string(out.join("V_v0.5.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,re,im,abs2"));
    assert_eq!(lines.count(), 400);
}

#[test]
fn configuration_errors_exit_with_two() {
    let bad = [
        (r#""m_a": 1.0"#, r#""m_a": 0.5"#, "decay channel closed"),
        (r#""momenta": [0.0, 0.5]"#, r#""momenta": [0.0, 0.5], "colour": 1"#, "colour"),
        (r#""velocities": [0.5]"#, r#""velocities": [1.0]"#, "1"),
        (r#""grid": {"n_modes": 9, "dk": 0.25},"#, "", "grid"),
        (r#""momenta": [0.0, 0.5]"#, r#""momenta": [0.3]"#, "0.3"),
        (r#""n_modes": 9"#, r#""n_modes": 8"#, "8"),
    ];
    for (from, to, needle) in bad {
        let text = SMALL.replace(from, to);
        assert_ne!(text, SMALL);
        let (o, dir) = run_config("speedup", &text, &[]);
        let err = String::from_utf8_lossy(&o.stderr);
        assert_eq!(o.status.code(), Some(2), "{to}: {err}");
        assert!(err.contains(needle), "{to}: {err}");
        assert!(!dir.path().join("out").exists());
    }
    let (o, _dir) = run_config("speedup", "{ not json", &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_results_write_only_the_report() {
    let (o, dir) = run_config("speedup", &SMALL.replace(r#"[0.5]"#, "[]"), &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(listing(&dir.path().join("out")), vec!["report.json"]);
    let r = report(dir.path());
    assert_eq!(r["results"]["entries"].as_array().unwrap().len(), 0);
}

#[test]
fn two_series_give_two_csvs_and_defaults_are_echoed() {
    let (o, dir) = run_config("speedup", SMALL, &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(listing(&dir.path().join("out")), vec!["V_explicit_v0.5.csv", "V_v0.5.csv", "report.json"]);
    let echo = &report(dir.path())["config_echo"];
    assert_eq!(echo["packet_width"].as_f64(), Some(1.0));
    assert_eq!(echo["t_grid"]["samples"].as_u64(), Some(400));
    assert_eq!(echo["fit"]["min_r_squared"].as_f64(), Some(0.999));
}

#[test]
fn operators_are_dumped_on_request() {
    let (o, dir) = run_config("moments", SMALL, &["--dump-operators"]);
    assert_eq!(o.status.code(), Some(0));
    let ops = dir.path().join("out/operators");
    assert_eq!(listing(&ops), vec!["H.csv", "N.csv", "P.csv"]);
    let h = std::fs::read_to_string(ops.join("H.csv")).unwrap();
    assert_eq!(h.lines().next(), Some("row,col,re,im"));
    let p = std::fs::read_to_string(ops.join("P.csv")).unwrap();
    assert!(p.lines().skip(1).all(|l| {
        let f: Vec<&str> = l.split(',').collect();
        f[0] == f[1]
    }));
}

#[test]
fn scan_writes_one_row_per_cell() {
    let (o, dir) = run_config("scan", &SMALL.replace(r#"[0.5]"#, "[0.2, 0.5, -0.8]"), &[]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("out/scan.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 2);
    assert!(text.starts_with("v,p,gamma,speedup_deviation"));
}

#[test]
fn failed_checks_exit_with_one() {
    let (o, dir) = run_config("dilation", SMALL, &[]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    assert!(r["checks"].as_array().unwrap().iter().any(|c| c["passed"] == false));
}
