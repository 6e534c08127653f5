use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cutgap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cutgap"))
        .args(args)
        .env_remove("CUTGAP_N")
        .output()
        .expect("binary runs")
}

fn report(dir: &Path) -> Value {
    let text = std::fs::read_to_string(dir.join("report.json")).expect("report written");
    serde_json::from_str(&text).unwrap()
}

fn stdout_report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report on stdout")
}

#[test]
fn embed_diamond_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = cutgap(&["embed", "--n", "2", "--k", "3", "--seed", "7", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert_eq!(r["status"], "pass");
    assert_eq!(r["results"]["distortion"], "4/3");
    let csv = std::fs::read_to_string(dir.path().join("separation.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("u,v,p_num,p_den,tag"));
    assert!(dir.path().join("sample.csv").exists());
}

#[test]
fn c1_square_is_one() {
    let out = cutgap(&["c1", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_report(&out)["results"]["c1"]["value"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 1e-6);
}

#[test]
fn environment_overrides_flags() {
    let out = Command::new(env!("CARGO_BIN_EXE_cutgap"))
        .args(["c1"])
        .env("CUTGAP_N", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r = stdout_report(&out);
    assert_eq!(r["config"]["n"], 4);
    let v = r["results"]["c1"]["value"].as_f64().unwrap();
    assert!((v - 4.0 / 3.0).abs() < 1e-6);
}

#[test]
fn reruns_are_identical_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_str().unwrap();
    let args = ["flowcut", "--k", "2", "--seed", "5", "--commodities", "3", "--out", path];
    let mut runs = Vec::new();
    for _ in 0..2 {
        assert_eq!(cutgap(&args).status.code(), Some(0));
        let mut r = report(dir.path());
        r.as_object_mut().unwrap().remove("timing");
        runs.push((r, std::fs::read(dir.path().join("gap.csv")).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn invalid_config_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = cutgap(&["flowcut", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(dir.path());
    assert_eq!(r["status"], "invalid-config");
    assert!(r["error"].as_str().unwrap().contains("seed"));
}

#[test]
fn budget_exit_code() {
    let out = cutgap(&["build", "--k", "5", "--budget-vertices", "100", "-q"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn failed_check_exits_one() {
    // An absurdly tight z-score limit makes the Monte Carlo check fail.
    let dir = tempfile::tempdir().unwrap();
    let out = cutgap(&[
        "embed", "--k", "2", "--seed", "1", "--samples", "500", "--z-limit", "1e-6", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(dir.path())["status"], "fail");
}

#[test]
fn instance_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let out = cutgap(&["flowcut", "--n", "3", "--seed", "9", "--out", first.to_str().unwrap(), "-q"]);
    assert_eq!(out.status.code(), Some(0));
    let instance = first.join("instance.json");
    let second = dir.path().join("second");
    let out = cutgap(&[
        "flowcut", "--input", instance.to_str().unwrap(), "--out", second.to_str().unwrap(), "-q",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&first)["results"]["gap"], report(&second)["results"]["gap"]);
}

#[test]
fn malformed_instance_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"graph": {"vertices": 2, "edges": [[0, 1, "1"]], "s": 0, "t": 1},
            "capacities": [["3/0"]], "commodities": [[0, 1, "1"]]}"#,
    )
    .unwrap();
    let out = cutgap(&["flowcut", "--input", path.to_str().unwrap(), "-q"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("capacities[0][0]"));
}

#[test]
fn audit_and_certify() {
    for args in [
        vec!["audit", "--k", "3", "--map", "fold", "-q"],
        vec!["audit", "--k", "2", "--eps", "0.05", "--delta", "1/2", "--mode", "double", "-q"],
        vec!["certify", "--n", "6", "-q"],
        vec!["certify", "--n", "2", "--k", "3", "--eps", "0.01", "-q"],
    ] {
        let out = cutgap(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn rejects_unknown_mode() {
    let out = cutgap(&["build", "--mode", "float"]);
    assert_eq!(out.status.code(), Some(2));
}
