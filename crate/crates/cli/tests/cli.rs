use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use helicity::report::Report;

fn helicity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_helicity"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report_from(out: &Output) -> Report {
    Report::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap()
}

#[test]
fn verify_spin_passes_and_is_reproducible() {
    let args = ["verify", "spin", "--sample-scale", "0.1"];
    let first = helicity(&args);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let report = report_from(&first);
    assert_eq!(report.seed, 7);
    assert!(report.calibration.is_some());
    assert!(report.records.iter().any(|r| r.suite == "spin") && report.all_passed());
    assert_eq!(helicity(&args).stdout, first.stdout);
}

#[test]
fn strict_tolerance_fails_spin() {
    let out = helicity(&["verify", "spin", "--sample-scale", "0.1", "--tol-scale", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!report_from(&out).all_passed());
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL spin/"));
}

#[test]
fn verify_kernel_at_degree_one_records_c1() {
    let out = helicity(&["verify", "kernel", "--n", "1", "--seed", "7", "--sample-scale", "0.25"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = report_from(&out);
    let fitted = report.records.iter().find(|r| r.check == "fitted-constants").unwrap();
    assert!((fitted.constants["C_1"] / (2.0 * PI) - 1.0).abs() < 1e-6);
    let calibration = report.calibration.unwrap();
    assert_eq!(calibration.constants.len(), 1);
}

#[test]
fn calibrate_reports_constants() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("calibration.json");
    let out = helicity(&["calibrate", "--n", "0..2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let report = Report::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let constant = |name: &str| {
        let r = report.records.iter().find(|r| r.check == name).unwrap();
        r.constants[name]
    };
    assert!((constant("C_0") / (2.0 * PI) - 1.0).abs() < 1e-6);
    assert!((constant("C_1") / (2.0 * PI) - 1.0).abs() < 1e-6);
    assert!((constant("C_2") / (4.0 * PI) - 1.0).abs() < 1e-6);
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    std::str::from_utf8(&out.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn converge_tables() {
    let out = helicity(&["converge", "exp-p0", "--ladder", "8,16,32,64"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.starts_with(b"order,value,error_estimate,exact_error\n"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 4);
    let at_32 = rows.iter().find(|r| r[0] == "32").unwrap();
    assert!(at_32[3].parse::<f64>().unwrap() < 1e-10);

    let out = helicity(&["converge", "kernel-diagonal-n2", "--ladder", "16,32"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert!(rows[1][3].parse::<f64>().unwrap() < 1e-6);

    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("empty.toml");
    std::fs::write(&config, "ladder = []\n").unwrap();
    let out = helicity(&["converge", "odd-moment", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(out.stdout, b"order,value,error_estimate,exact_error\n");
}

fn write_report(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut full = args.to_vec();
    full.extend(["--sample-scale", "0.1", "--out", &path]);
    assert_eq!(helicity(&full).status.code(), Some(0));
    path
}

#[test]
fn report_merge() {
    let dir = tempfile::tempdir().unwrap();
    let spin = write_report(dir.path(), "spin.json", &["verify", "spin"]);
    let poincare = write_report(dir.path(), "poincare.json", &["verify", "poincare"]);
    let other_seed = write_report(dir.path(), "seed.json", &["verify", "spin", "--seed", "8"]);

    let out = helicity(&["report", "merge", &spin, &poincare]);
    assert_eq!(out.status.code(), Some(0));
    let merged = report_from(&out);
    let suites: Vec<&str> = merged.records.iter().map(|r| r.suite.as_str()).collect();
    assert!(suites.contains(&"spin") && suites.contains(&"poincare"));

    let out = helicity(&["report", "merge", &spin, &other_seed]);
    assert_eq!(out.status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(helicity(&["report", "merge", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn invalid_input_exits_with_usage_status() {
    assert_eq!(helicity(&["verify", "nope"]).status.code(), Some(2));
    assert_eq!(helicity(&["converge", "nope"]).status.code(), Some(2));
    assert_eq!(helicity(&["calibrate", "--n", "3..1"]).status.code(), Some(2));
    assert_eq!(helicity(&["calibrate", "--radial-order", "1"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "unknown_key = 3\n").unwrap();
    let out = helicity(&["verify", "spin", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.toml"));
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let default = helicity::config::SuiteConfig::load(&dir.join("default.toml")).unwrap();
    assert_eq!(default, helicity::config::SuiteConfig::default());
    let quick = helicity::config::SuiteConfig::load(&dir.join("quick.toml")).unwrap();
    assert_eq!(quick.packets, ["centered"]);
}
