use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqa-noise")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

const SMALL_RATE: &str = r#"{
  "toy_model": {"n": 3, "depth": 1},
  "sweep": {"variable": "rate", "values": [1e-4, 1e-3], "seeds": [0, 1],
            "optimizer": {"restarts": 1}}
}"#;

#[test]
fn verify_channels_exit_codes() {
    let ok = run(&["verify-channels", "--cases", "20"]);
    assert_eq!(ok.status.code(), Some(0));
    let text = stdout(&ok);
    assert_eq!(text.matches("PASS").count(), 3, "{text}");
    let bad = run(&["verify-channels", "--cases", "20", "--variance-scale", "1.01"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("FAIL"));
}

#[test]
fn predict_scaling_numbers() {
    let o = run(&["predict", "--scaling", "r=1", "n=100", "M=100", "eps=1e-3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for line in [
        "sufficient error rate: 1e-7",
        "sufficient error rate with mitigation: 3e-5",
        "necessary error rate: 1e-5",
    ] {
        assert!(text.contains(line), "{text}");
    }
    assert_eq!(run(&["predict", "--scaling", "r=1", "n=100"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["sweep"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
    let unknown = write_config(dir.path(), "bad.json", r#"{"seeed": 3}"#);
    assert_eq!(run(&["mitigate-demo", "--config", &unknown]).status.code(), Some(2));
    let no_sweep = write_config(dir.path(), "empty.json", "{}");
    assert_eq!(run(&["sweep", "--config", &no_sweep]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["mitigate-demo", "--mode", "exact", "--samples", "10"]).status.code(), Some(2));
}

#[test]
fn rate_sweep_writes_deterministic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "rate.json", SMALL_RATE);
    let mut tables = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = run(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", "1"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("log-log slope"));
        for f in ["config.json", "record.json", "sweep.csv", "epsilon.svg", "relative.svg"] {
            assert!(out.join(f).exists(), "{f}");
        }
        let mut rd = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
        let header = rd.headers().unwrap().clone();
        assert_eq!(header.len(), 13);
        assert_eq!(&header[0], "sweep_value");
        let rows: Vec<Vec<String>> = rd
            .records()
            .map(|r| r.unwrap().iter().take(12).map(String::from).collect())
            .collect();
        assert_eq!(rows.len(), 4);
        tables.push(rows);
        let resolved = fs::read_to_string(out.join("config.json")).unwrap();
        assert!(resolved.contains("\"circuit_seed\"") && resolved.contains("\"grad_tol\""));
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn gap_sweep_prints_monotonicity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "gap.json",
        r#"{"toy_model": {"n": 3, "depth": 1},
            "sweep": {"variable": "gap", "values": [5, 50], "seeds": [0], "optimizer": {"restarts": 1}}}"#,
    );
    let out = dir.path().join("gap");
    let o = run(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("monotonicity:"), "{}", stdout(&o));
}

#[test]
fn mitigate_demo_reports() {
    let dir = tempfile::tempdir().unwrap();
    let clean = write_config(dir.path(), "clean.json", r#"{"toy_model": {"n": 3}}"#);
    let o = run(&["mitigate-demo", "--config", &clean, "--out", dir.path().join("c").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["raw_noisy"], v["report"]["mitigated"]);

    let noisy = write_config(
        dir.path(),
        "noisy.json",
        r#"{"toy_model": {"n": 3}, "noise": {"q1": 1e-4, "q2": 1e-3, "q_readout": 1e-3}}"#,
    );
    let out = dir.path().join("n");
    let o = run(&["mitigate-demo", "--config", &noisy, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let residual = v["mitigated_error"].as_f64().unwrap().abs();
    assert!(residual <= v["report"]["remainder_bound"].as_f64().unwrap());
    assert!(residual < v["raw_error"].as_f64().unwrap().abs());
    assert!(out.join("mitigation.json").exists());

    let p = run(&["predict", "--config", &noisy, "--out", dir.path().join("p").to_str().unwrap()]);
    assert_eq!(p.status.code(), Some(0));
    let b: serde_json::Value = serde_json::from_str(&stdout(&p)).unwrap();
    assert!((b["epsilon"].as_f64().unwrap() - v["raw_error"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn trajectory_flags_override_mode() {
    let dir = tempfile::tempdir().unwrap();
    let noisy = write_config(
        dir.path(),
        "noisy.json",
        r#"{"toy_model": {"n": 2, "depth": 1}, "noise": {"q1": 1e-3, "q2": 1e-2, "q_readout": 1e-2}}"#,
    );
    let out = dir.path().join("t");
    let o = run(&[
        "mitigate-demo", "--config", &noisy, "--out", out.to_str().unwrap(), "--mode", "trajectory", "--samples", "2000",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let resolved = fs::read_to_string(out.join("config.json")).unwrap();
    assert!(resolved.contains("\"trajectory\"") && resolved.contains("2000"));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["report"]["raw_std_error"].as_f64().unwrap() > 0.0);
}
