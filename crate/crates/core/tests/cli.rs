//! End-to-end runs of the `malliavin-kit` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_malliavin-kit"));
    c.env_remove("MALLIAVIN_KIT_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

const SMALL_GRADCHECK: &str = "suite = \"gradcheck\"\ndim = 3\n[gradcheck]\npoints = 4\nprobes = 2\noperators = 2\n";

#[test]
fn list_suites_names_every_suite() {
    let out = run(&["list-suites"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["gradcheck", "malliavin", "ibp", "chaos", "lasry-lions", "interp", "all"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing from\n{text}");
    }
}

#[test]
fn show_config_applies_overrides() {
    let out = run(&["show-config", "--seed", "42", "--suite", "chaos", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed = 42"));
    assert!(text.contains("suite = \"chaos\""));
    assert!(text.contains("format = \"csv\""));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown_key = write_config(dir.path(), "bad.toml", "dimension = 3\n");
    let cases: Vec<Vec<&str>> = vec![
        vec!["run", "--suite", "nope"],
        vec!["run", "--bogus"],
        vec!["run", "--format", "xml"],
        vec!["run", "--config", "/definitely/missing.toml"],
        vec!["run", "--config", &unknown_key],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = bin().args(["run", "--suite", "chaos"]).env("MALLIAVIN_KIT_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn passing_suite_exits_0_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.toml", SMALL_GRADCHECK);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (out, threads) in [(&a, "1"), (&b, "2")] {
        let o = bin()
            .args(["run", "--config", &cfg, "--out", out.to_str().unwrap()])
            .env("MALLIAVIN_KIT_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut ja: serde_json::Value = serde_json::from_slice(&fs::read(&a).unwrap()).unwrap();
    let mut jb: serde_json::Value = serde_json::from_slice(&fs::read(&b).unwrap()).unwrap();
    // the echoed output path is the only intended difference
    ja["config"]["out"] = serde_json::Value::Null;
    jb["config"]["out"] = serde_json::Value::Null;
    assert_eq!(ja, jb);
    assert_eq!(ja["pass"], true);
    assert!(dir.path().join("a.meta.json").exists());
}

#[test]
fn csv_writes_row_and_table_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "g.toml", SMALL_GRADCHECK);
    let out = dir.path().join("report.csv");
    let o = run(&["run", "--config", &cfg, "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = fs::read_to_string(&out).unwrap();
    assert!(rows.lines().next().unwrap().contains("residual"));
    let siblings: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("report.") && n.ends_with(".csv") && n != "report.csv")
        .collect();
    assert!(!siblings.is_empty());
}

#[test]
fn failing_checks_exit_1() {
    // far outside the step sizes the envelope solver is tuned for
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "ll.toml",
        "suite = \"lasry-lions\"\ndim = 2\n[lasry_lions]\nt_grid = [100.0, 50.0]\npoints = 4\noracle_points = 4\n",
    );
    let o = run(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let body: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(body["pass"], false);
    assert!(String::from_utf8_lossy(&o.stderr).contains("failing:"));
}
