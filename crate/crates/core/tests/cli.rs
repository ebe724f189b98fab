use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn akfocus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_akfocus"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_into(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    akfocus(&args)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn moments_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into("moments", &config("entangled.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = read_json(&dir.path().join("moments.json"));
    assert_eq!(v, serde_json::from_slice::<Value>(&out.stdout).unwrap());
    let obj = v.as_object().unwrap();
    let numbers = [
        "mQ1", "mQ2", "mP1", "mP2", "vQ1", "vQ2", "vP1", "vP2", "cQ", "cP", "e1", "e2", "varE", "f1", "f2", "varF",
        "varE_single", "varF_single", "FQ", "FP", "varProduct", "m2Product",
    ];
    for k in numbers {
        assert!(obj[k].is_f64(), "{k}");
    }
    assert!(obj["jointly_focused"].as_bool().unwrap());
    assert_eq!(obj.len(), numbers.len() + 1);
    let keys: Vec<&String> = obj.keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!((obj["FQ"].as_f64().unwrap() + 1.1019736842).abs() < 1e-9);
}

#[test]
fn verify_schema_and_exit_codes() {
    for (name, code) in [
        ("standard.toml", 0),
        ("entangled.toml", 0),
        ("mixture.toml", 0),
        ("weak_kappa_assertion.toml", 3),
        ("kappa_sign_fault.toml", 3),
        ("narrow_grid.toml", 4),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let out = run_into("verify", &config(name), dir.path(), &[]);
        assert_eq!(out.status.code(), Some(code), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        if code == 4 {
            assert!(String::from_utf8_lossy(&out.stderr).contains("truncation"));
            continue;
        }
        let v = read_json(&dir.path().join("verify.json"));
        assert_eq!(v["pass"].as_bool(), Some(code == 0), "{name}");
        for c in v["checks"].as_array().unwrap() {
            assert!(c["name"].is_string());
            assert!(c["value"].is_number() || c["value"].is_boolean(), "{c}");
            assert!(c["tolerance"].is_number() || c["tolerance"].is_boolean() || c["tolerance"].is_null(), "{c}");
            let verdict = c["verdict"].as_str().unwrap();
            assert!(verdict == "pass" || verdict == "fail");
        }
    }
}

fn failed_checks(v: &Value) -> Vec<String> {
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["verdict"] == "fail")
        .map(|c| c["name"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn kappa_sign_fault_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    run_into("verify", &config("kappa_sign_fault.toml"), dir.path(), &[]);
    let failed = failed_checks(&read_json(&dir.path().join("verify.json")));
    assert!(failed.iter().any(|n| n == "marginal_position"), "{failed:?}");
}

#[test]
fn weak_kappa_focusing_assertion_is_false() {
    let dir = tempfile::tempdir().unwrap();
    run_into("verify", &config("weak_kappa_assertion.toml"), dir.path(), &[]);
    let v = read_json(&dir.path().join("verify.json"));
    assert_eq!(failed_checks(&v), ["joint_focusing_assertion"]);
    assert_eq!(v["focusing_predicate"], false);
}

#[test]
fn simulate_writes_csv_with_headers() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into("simulate", &config("standard.toml"), dir.path(), &["--shift", "1,0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["joint.csv", "marginal_x.csv", "marginal_y.csv", "noise_q.csv", "noise_p.csv", "summary.json"] {
        let text = std::fs::read_to_string(dir.path().join(f)).unwrap();
        assert!(!text.contains('\r'), "{f}");
        if f.ends_with(".csv") {
            let mut lines = text.lines();
            let width = lines.next().unwrap().split(',').count();
            assert!(lines.all(|l| l.split(',').count() == width), "{f}");
        }
    }
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["pass"], true);
}

#[test]
fn scan_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into("scan", &config("entangled.toml"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,mu,kappa,FQ,FP,jointly_focused"));
    assert_eq!(lines.count(), 10 * 10 * 13);
    assert!(text.contains("\n0.5,0.5,2,-1.10197368421,-2.1375,true\n"));
}

#[test]
fn invalid_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let base = std::fs::read_to_string(config("standard.toml")).unwrap();
    std::fs::write(&bad, format!("{base}\n[grid]\nn = 64\nextent = 3\n")).unwrap();
    let out = run_into("moments", &bad, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("extent"));

    std::fs::write(&bad, base.replace("a = 0.5", "a = -0.5")).unwrap();
    assert_eq!(run_into("moments", &bad, dir.path(), &[]).status.code(), Some(2));

    assert_eq!(akfocus(&["moments"]).status.code(), Some(2));
    assert_eq!(akfocus(&["frobnicate", "--config", "x"]).status.code(), Some(2));
    let out = run_into("simulate", &config("standard.toml"), dir.path(), &["--shift", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    for (cmd, file) in [("scan", "scan.csv"), ("verify", "verify.json"), ("moments", "moments.json")] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let cfg = config("entangled.toml");
        let (ra, rb) = (run_into(cmd, &cfg, a.path(), &[]), run_into(cmd, &cfg, b.path(), &[]));
        assert_eq!(ra.stdout, rb.stdout, "{cmd}");
        let fa = std::fs::read(a.path().join(file)).unwrap();
        assert_eq!(fa, std::fs::read(b.path().join(file)).unwrap(), "{cmd}");
    }
}
