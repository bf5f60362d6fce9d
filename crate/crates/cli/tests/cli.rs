use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn accelmap(args: &[&str], config: Option<&str>, dir: &TempDir) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_accelmap"));
    cmd.args(args).arg("--out").arg(dir.path().join("out"));
    if let Some(text) = config {
        let path = dir.path().join("config.json");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.env_remove("ACCELMAP_THREADS");
    cmd.output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_GRID: &str = r#""verify": {"inertial_durations": [0.5], "accel_durations": [0.5, 1.0], "accelerations": [1.0, 3.0]}"#;

#[test]
fn malformed_config_exits_2_without_output() {
    for bad in ["{", r#"{"detector": {"epsilon": -1}}"#, r#"{"sweep": {"values": [2, 1]}}"#] {
        let dir = TempDir::new().unwrap();
        let out = accelmap(&["run"], Some(bad), &dir);
        assert_eq!(out.status.code(), Some(2), "{bad}");
        assert!(!dir.path().join("out").exists());
    }
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_accelmap"))
        .args(["run", "--out"])
        .arg(dir.path().join("out"))
        .env("ACCELMAP_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn zero_coupling_writes_identity_map() {
    let dir = TempDir::new().unwrap();
    let out = accelmap(&["run"], Some(r#"{"detector": {"coupling_abs": 0}}"#), &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let maps = json(&dir.path().join("out/map.json"));
    for m in maps["maps"].as_array().unwrap() {
        let a = m["a"].as_array().unwrap();
        for (i, row) in a.iter().enumerate() {
            for (j, z) in row.as_array().unwrap().iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_eq!(z[0].as_f64().unwrap(), want);
                assert_eq!(z[1].as_f64().unwrap(), 0.0);
            }
        }
    }
}

#[test]
fn no_inertial_stretch_is_cp() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"trajectory": {"inertial_duration": 0, "acceleration": 3, "accel_duration": 1}}"#;
    let out = accelmap(&["run"], Some(cfg), &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("out/report.json"));
    let cls = report["classification"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["map"] == "ini_to_accelerated")
        .unwrap();
    assert_eq!(cls["classification"], "CP");
    assert_eq!(report["pass"], true);
    assert!(dir.path().join("out/state.csv").exists());
}

#[test]
fn run_flags_nonconvergence_with_exit_3() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"quadrature": {"max_depth": 1, "rel_tol": 1e-12, "abs_tol": 1e-15}}"#;
    let out = accelmap(&["run"], Some(cfg), &dir);
    assert_eq!(out.status.code(), Some(3));
    let report = json(&dir.path().join("out/report.json"));
    assert_eq!(report["pass"], false);
    assert!(!report["nonconverged"].as_array().unwrap().is_empty());
}

#[test]
fn verify_passes_on_small_grid() {
    let dir = TempDir::new().unwrap();
    let out = accelmap(&["verify"], Some(&format!("{{{SMALL_GRID}}}")), &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("out/report.json"));
    assert_eq!(report["pass"], true);
    assert_eq!(report["scenarios"].as_array().unwrap().len(), 4);
}

#[test]
fn verify_catches_flipped_cross_kernel() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(r#"{{{SMALL_GRID}, "fault_injection": {{"flip_ai_kernel_sign": true}}}}"#);
    let out = accelmap(&["verify"], Some(&cfg), &dir);
    assert_eq!(out.status.code(), Some(4));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("conj"), "{stderr}");
}

#[test]
fn loose_tolerance_still_verifies() {
    let dir = TempDir::new().unwrap();
    let out = accelmap(&["verify", "--tol", "1e-2"], Some(&format!("{{{SMALL_GRID}}}")), &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("out/report.json"));
    let tol = report["scenarios"][0]["tol_real"].as_f64().unwrap();
    assert!(tol > 1e-8);
}

#[test]
fn csv_outputs_are_byte_identical() {
    let cfg = r#"{"sweep": {"variable": "T", "values": [0.5, 1.0, 1.5]}, "bloch": {"n_samples": 64}}"#;
    let mut files = Vec::new();
    for _ in 0..2 {
        let dir = TempDir::new().unwrap();
        assert_eq!(accelmap(&["sweep-eigs"], Some(cfg), &dir).status.code(), Some(0));
        assert_eq!(accelmap(&["bloch-scan"], Some(cfg), &dir).status.code(), Some(0));
        files.push((
            fs::read(dir.path().join("out/eigs.csv")).unwrap(),
            fs::read(dir.path().join("out/points.csv")).unwrap(),
        ));
    }
    assert_eq!(files[0], files[1]);
    let eigs = String::from_utf8(files[0].0.clone()).unwrap();
    assert!(!eigs.contains('\r'));
    let mut lines = eigs.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sweep_value,eig1,eig2,eig3,eig4,classification,tol_cls,status"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "5.0000000000000000e-1");
    let e: Vec<f64> = first[1..5].iter().map(|s| s.parse().unwrap()).collect();
    assert!(e.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(eigs.lines().count(), 4);
}

#[test]
fn csv_only_output_skips_json() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"bloch": {"n_samples": 10}, "output": {"formats": ["csv"]}}"#;
    assert_eq!(accelmap(&["bloch-scan"], Some(cfg), &dir).status.code(), Some(0));
    assert!(dir.path().join("out/points.csv").exists());
    assert!(!dir.path().join("out/bloch.json").exists());
}

#[test]
fn identity_bloch_scan_stays_on_sphere() {
    let dir = TempDir::new().unwrap();
    let out = accelmap(
        &["bloch-scan", "--samples", "100"],
        Some(r#"{"detector": {"coupling_abs": 0}}"#),
        &dir,
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("out/points.csv")).unwrap();
    // 100 lattice points plus the six poles.
    assert_eq!(csv.lines().count(), 107);
    for line in csv.lines().skip(1) {
        assert!(line.ends_with(",false"), "{line}");
    }
    assert!(String::from_utf8_lossy(&out.stdout).contains("outside_fraction 0.0000000000000000e0"));
}

#[test]
fn oracle_rows_vanish_without_inertial_stretch() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"trajectory": {"inertial_duration": 0, "accel_duration": 1}}"#;
    let out = accelmap(&["oracle-compare"], Some(cfg), &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/oracle.csv")).unwrap();
    let ii: Vec<&str> = csv.lines().filter(|l| l.contains("Y_II")).collect();
    assert_eq!(ii.len(), 6);
    for line in ii {
        let f: Vec<&str> = line.split(',').collect();
        for v in &f[1..6] {
            assert_eq!(v.parse::<f64>().unwrap(), 0.0, "{line}");
        }
    }
}

#[test]
fn oracle_agrees_on_reference_scenario() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"trajectory": {"inertial_duration": 1, "acceleration": 3, "accel_duration": 1}}"#;
    let out = accelmap(&["oracle-compare"], Some(cfg), &dir);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("out/oracle.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}
