use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistcert")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn gen(dir: &Path, family: &str, n: &str) -> String {
    let path = dir.join(format!("{family}.json"));
    let p = path.to_str().unwrap().to_string();
    let o = run(&["gen-fixture", "--family", family, "--N", n, "--out", &p]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    p
}

#[test]
fn gen_fixture_is_canonical_and_exact() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "zeta-squared", "100000");
    let text = std::fs::read_to_string(&p).unwrap();
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["N"], 100000);
    assert_eq!(doc["coefficients"][11][0].as_f64(), Some(6.0));

    let again = run(&["gen-fixture", "--family", "zeta-squared", "--N", "100000"]);
    assert!(again.status.success());
    assert_eq!(again.stdout, text.as_bytes());
}

#[test]
fn delta_fixture_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "delta", "5000");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
    let c = doc["coefficients"].as_array().unwrap();
    // tau(2) / 2^(11/2)
    let expected = -24.0 / 2f64.powf(5.5);
    assert!((c[1][0].as_f64().unwrap() - expected).abs() < 1e-15);
}

#[test]
fn twist_decomposition_example_passes() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "zeta-squared", "100000");
    let o = run(&["verify-lemma3", "--fixture", &p, "--D", "6", "--a", "1", "--max-n", "5000"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("worst coefficient residual"));
}

#[test]
fn character_expansion_sweep_passes() {
    let o = run(&["verify-lemma1", "--D-max", "20", "--max-n", "60"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn principal_restriction_sampled_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "zeta-l4", "3000");
    let args = ["verify-lemma2", "--fixture", &p, "--max-n", "3000", "--sample", "200", "--seed", "11", "--json"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn pole_example_is_holomorphic() {
    let o = run(&["pole", "--d", "2", "--q", "1", "--theta", "0", "--alpha", "1"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("n_alpha = 1/4"), "{s}");
    assert!(s.contains("holomorphic at s0"), "{s}");
}

#[test]
fn malformed_fixture_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"label\": \"x\", \"N\": 2,\n \"coefficients\": [[1, 0], [1]]}").unwrap();
    let o = run(&["verify-lemma2", "--fixture", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn audit_emits_verdict_json() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "zeta-squared", "20000");
    let h = dir.path().join("h.json");
    std::fs::write(
        &h,
        r#"{"D": 6, "theta_F": 0, "twists": [
            {"chi_index": 0, "degree": 2, "shift": 0, "conductor": "36"},
            {"chi_index": 1, "degree": 2, "shift": 0, "conductor": "9"}]}"#,
    )
    .unwrap();
    let o = run(&["audit", "--fixture", &p, "--D", "6", "--hypothesis", h.to_str().unwrap(), "--json"]);
    assert_ne!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let verdict = doc["verdict"].as_str().unwrap();
    assert!(["CONTRADICTION", "HYPOTHESIS-CONSISTENT", "NO-WITNESS-UP-TO-BOUND"].contains(&verdict), "{verdict}");
    assert!(doc["sets"]["members"].is_array());
    assert_eq!(doc["pass"], Value::Bool(o.status.success()));
}

#[test]
fn phase_half_exponent_fits_constant() {
    let o = run(&["phase", "--beta", "1/5", "--alpha", "1", "--lambda", "1/2", "--json"]);
    assert!(o.status.success());
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let c = doc["constant_fit"]["constant"].as_f64().unwrap();
    assert!((c - 1.25).abs() < 1e-6, "{c}");
}

#[test]
fn saturation_reports_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "zeta-squared", "5000");
    let o = run(&["saturation", "--fixture", &p, "--D", "6,10", "--rank-cutoff", "400", "--json"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["moduli"][1]["rank"], 4);
}
