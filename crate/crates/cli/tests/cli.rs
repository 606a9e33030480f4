use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use halfint_core::forms::{load_form, save_form};
use serde_json::Value;

fn halfint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_halfint"))
        .args(args)
        .env_remove("KOHNEN_SIEVE_CACHE")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn manifest(out: &Path) -> Value {
    let m = out.with_file_name(format!("{}.manifest.json", out.file_name().unwrap().to_str().unwrap()));
    serde_json::from_str(&fs::read_to_string(m).unwrap()).unwrap()
}

#[test]
fn form_build_writes_json_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("form.json");
    let o = halfint(&["--out", path(&out), "form", "build", "--ell", "6", "--prec", "5000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["precision"], 5000);
    assert_eq!(doc["weight"], "13/2");
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["summary"]["dimension"], 1);
    assert!(m["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert!(m["versions"]["halfint"].is_string());
}

#[test]
fn form_round_trip_at_5000() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("form.json");
    assert!(halfint(&["--out", path(&out), "form", "build", "--prec", "5000"]).status.success());
    let f = load_form(&out).unwrap();
    let again = dir.path().join("again.json");
    save_form(&f, &again).unwrap();
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
    assert_eq!(load_form(&again).unwrap(), f);
}

#[test]
fn vaughan_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = halfint(&["--out", path(out), "vaughan", "verify", "--r", "2", "--trials", "1000", "--seed", "42"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let text = fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("n,r,Q,R,S1,S2,S3,S4,lambda,error\n"));
    assert_eq!(text.lines().count(), 1001);
}

#[test]
fn partial_sums_beyond_precision_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let form = dir.path().join("form.json");
    assert!(halfint(&["--out", path(&form), "form", "build", "--prec", "10^5"]).status.success());
    let out = dir.path().join("sums.csv");
    let o = halfint(&["--out", path(&out), "sums", "partial", "--form", path(&form), "--xmax", "10^7"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("maximum usable value is 99999"), "{err}");
    assert_eq!(manifest(&out)["status"]["exit_code"], 3);
}

#[test]
fn malformed_forms_are_rejected_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("check.json");
    let bad = [
        // coefficient at n ≡ 2 mod 4
        r#"{"ell":6,"weight":"13/2","level":4,"precision":10,"coeffs":[[1,"1"],[6,"3"]]}"#,
        // missing precision
        r#"{"ell":6,"weight":"13/2","level":4,"coeffs":[[1,"1"]]}"#,
        // nonzero constant term
        r#"{"ell":6,"weight":"13/2","level":4,"precision":10,"coeffs":[[0,"2"],[1,"1"]]}"#,
        "not json",
    ];
    for (i, text) in bad.iter().enumerate() {
        let f = dir.path().join(format!("bad{i}.json"));
        fs::write(&f, text).unwrap();
        let o = halfint(&["--out", path(&out), "form", "check", "--form", path(&f)]);
        assert_eq!(o.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn usage_and_parameter_errors_exit_2() {
    assert_eq!(halfint(&["form", "build"]).status.code(), Some(2));
    assert_eq!(halfint(&["lambda", "table", "--r", "0", "--x", "100"]).status.code(), Some(2));
    assert_eq!(halfint(&["lvalue", "central", "--d", "9"]).status.code(), Some(2));
    assert_eq!(halfint(&["--threads", "0", "lambda", "table", "--r", "1", "--x", "10"]).status.code(), Some(2));
    assert_eq!(halfint(&["form", "build", "--prec", "1.5"]).status.code(), Some(2));
}

#[test]
fn lambda_table_to_stdout() {
    let o = halfint(&["lambda", "table", "--r", "2", "--x", "12"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,Lambda_1,Lambda_2");
    assert_eq!(lines.len(), 13);
    // Λ_1(8) = log 2, Λ_2(6) = 2 log 2 log 3
    let row = |n: usize| -> Vec<f64> { lines[n].split(',').map(|v| v.parse().unwrap()).collect() };
    assert!((row(8)[1] - 2f64.ln()).abs() < 1e-15);
    assert!((row(6)[2] - 2.0 * 2f64.ln() * 3f64.ln()).abs() < 1e-12);
    assert_eq!(row(1)[1], 0.0);
}

#[test]
fn sieve_cache_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_halfint"))
            .args(["lambda", "table", "--r", "1", "--x", "5000"])
            .env("KOHNEN_SIEVE_CACHE", dir.path())
            .output()
            .unwrap()
    };
    let first = run();
    assert!(first.status.success());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    let second = run();
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn replay_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let form = dir.path().join("form.json");
    assert!(halfint(&["--out", path(&form), "form", "build", "--prec", "3000"]).status.success());
    let a = dir.path().join("signs.csv");
    let o = halfint(&["--out", path(&a), "--threads", "1", "signs", "count", "--form", path(&form), "--x", "2999"]);
    assert!(o.status.success());
    let b = dir.path().join("again.csv");
    let m = dir.path().join("signs.csv.manifest.json");
    let o = halfint(&["--out", path(&b), "--threads", "3", "replay", "--manifest", path(&m)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(manifest(&b)["threads"], 3);
}
