use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn write(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn crawford(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crawford")).args(args).output().unwrap()
}

fn json_out(o: &Output) -> Value {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

const SWAP: &str = r#"{"matrix": [[0, 1], [1, 0]]}"#;
const NILPOTENT: &str = r#"{"space": {"dim": 2, "field": "complex", "p": 2}, "matrix": [[0, 1], [0, 0]]}"#;

#[test]
fn compute_swap_is_attained_zero() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "swap.json", SWAP);
    let v = json_out(&crawford(&["compute", "--input", &f]));
    assert_eq!(v["value"], 0.0);
    assert_eq!(v["attained"], true);
    assert_eq!(v["certificate"]["x"], serde_json::json!([1.0, 0.0]));
}

#[test]
fn compute_identity_quantities() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "id.json", r#"{"matrix": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}"#);
    for space in ["1", "1.5", "inf", "complex:3"] {
        for q in ["crawford", "radius", "minnorm", "opnorm"] {
            let v = json_out(&crawford(&["compute", "--input", &f, "--space", space, "--quantity", q]));
            assert!((v["value"].as_f64().unwrap() - 1.0).abs() <= 1e-9, "{space} {q}");
            assert_eq!(v["quantity"], q);
        }
    }
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let no_matrix = write(&dir, "bad.json", r#"{"space": {"dim": 2, "p": 2}}"#);
    let not_json = write(&dir, "garbage.json", "{not json");
    let swap = write(&dir, "swap.json", SWAP);
    for args in [
        vec!["compute", "--input", &no_matrix],
        vec!["compute", "--input", &not_json],
        vec!["compute", "--input", "/nonexistent/op.json"],
        vec!["compute", "--input", &swap, "--quantity", "bogus"],
        vec!["compute", "--input", &swap, "--tol", "-1"],
        vec!["range", "--input", &swap, "--space", "3"],
        vec!["repair", "--input", &swap, "--eps", "0"],
    ] {
        let o = crawford(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn numerical_failure_exits_3() {
    // c = 0 on the rotation, below the refiner's step sizes
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "rot.json",
        r#"{"operator": {"matrix": [[0, 1], [-1, 0]]}, "start": {"x": [1, 0], "xstar": [1, 0]}, "eps": 1}"#,
    );
    assert_eq!(crawford(&["bpb", "--input", &f]).status.code(), Some(3));
}

#[test]
fn range_of_nilpotent_is_half_disc() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "nil.json", NILPOTENT);
    let o = crawford(&["range", "--input", &f, "--samples", "360"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    let (c, nu) = header.trim_start_matches("# ").split_once(", ").unwrap();
    assert!(c.trim_start_matches("c=").parse::<f64>().unwrap().abs() <= 1e-12);
    assert!((nu.trim_start_matches("nu=").parse::<f64>().unwrap() - 0.5).abs() <= 1e-9);
    assert_eq!(lines.next().unwrap(), "theta,re,im,support");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 360);
    let step = 2.0 * std::f64::consts::PI / 360.0;
    for r in &rows {
        assert!(r[1].hypot(r[2]) <= 0.5 + 1e-6);
    }
    let (a, b) = (&rows[0], &rows[359]);
    assert!((a[1] - b[1]).hypot(a[2] - b[2]) <= step);
}

#[test]
fn range_of_identity_is_a_point() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "id.json", r#"{"matrix": [[1, 0], [0, 1]]}"#);
    let out = crawford(&["range", "--input", &f, "--samples", "12"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for row in text.lines().skip(2) {
        let v: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] - 1.0).abs() <= 1e-12 && v[2].abs() <= 1e-12);
    }
}

#[test]
fn repair_and_output_file() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "op.json", r#"{"space": {"dim": 2, "p": 3}, "matrix": [[1, 0.3], [-0.2, 0.8]]}"#);
    let out = dir.path().join("r.json");
    for kind in ["auto", "zero", "exposing"] {
        let o = crawford(&["repair", "--input", &f, "--eps", "1", "--kind", kind, "--output", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{kind}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert!(v["distance"].as_f64().unwrap() < 1.0);
        assert!(v["S"]["matrix"].is_array());
    }
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "op.json", r#"{"space": {"dim": 2, "field": "complex", "p": "inf"}, "matrix": [[1, [0, 0.5]], [0.2, -0.7]]}"#);
    for args in [
        vec!["compute", "--input", &f, "--quantity", "crawford"],
        vec!["repair", "--input", &f, "--eps", "0.3", "--kind", "exposing", "--seed", "5"],
    ] {
        let a = crawford(&args);
        let b = crawford(&args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn bpb_identity_trace() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "bpb.json",
        r#"{"operator": {"matrix": [[1, 0], [0, 1]]}, "start": {"x": [1, 0], "xstar": [1, 0]}, "eps": 1}"#,
    );
    let v = json_out(&crawford(&["bpb", "--input", &f]));
    assert_eq!(v["steps"][0]["lambda"], serde_json::json!([-1.0, 0.0]));
    assert_eq!(v["steps"][0]["op_delta"], 0.25);
    assert!(v["total_distance"].as_f64().unwrap() <= 0.5 + 1e-9);
}

#[test]
fn witness_constant_sequence() {
    let dir = TempDir::new().unwrap();
    let state = r#"{"x": [1, 0], "xstar": [1, 0]}"#;
    let body = |c: f64| {
        format!(
            r#"{{"operator": {{"matrix": [[1, 0], [0, 1]]}}, "states": [{state}, {state}], "deltas": [1, 0.5], "epsilons": [1, 0.25], "c": {c}}}"#
        )
    };
    let good = write(&dir, "good.json", &body(1.0));
    let bad = write(&dir, "bad.json", &body(0.0));
    assert_eq!(json_out(&crawford(&["witness", "--input", &good]))["all_satisfied"], true);
    assert_eq!(json_out(&crawford(&["witness", "--input", &bad]))["all_satisfied"], false);
}

#[test]
fn polytope_functional() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "poly.json", r#"{"vertices": [[1, 1], [2, 1], [1, 3]], "functional": [1, 0], "eps": 0.5}"#);
    let v = json_out(&crawford(&["polytope", "--input", &f]));
    assert_eq!(v["case"], "sign_definite");
}

fn verify(dir: &TempDir, cfg: &str) -> Output {
    let p = write(dir, "cfg.json", cfg);
    crawford(&["verify", "--config", &p])
}

#[test]
fn verify_small_population_passes() {
    let dir = TempDir::new().unwrap();
    let o = verify(&dir, r#"{"instances": 6, "dims": [2], "ps": [1, 2, "inf"], "seed": 3}"#);
    let v = json_out(&o);
    assert_eq!(v["all_passed"], true);
    assert_eq!(v["invariants"].as_array().unwrap().len(), 8);
    assert!(v["wall_clock_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn verify_planted_bug_fails_with_replayable_dump() {
    let dir = TempDir::new().unwrap();
    let o = verify(&dir, r#"{"instances": 2, "dims": [2], "ps": [2], "planted_bug": true, "seed": 9}"#);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let f = &v["failures"][0];
    assert_eq!(f["invariant"], "lipschitz");
    assert!(f["margin"].as_f64().unwrap() < 0.0);
    let replay = format!(
        r#"{{"dims": [2], "ps": [2], "planted_bug": true, "seed": {}, "only": [{}]}}"#,
        f["replay"]["seed"], f["instance"]
    );
    let again: Value = serde_json::from_slice(&verify(&dir, &replay).stdout).unwrap();
    assert_eq!(again["failures"][0]["margin"], f["margin"]);
    assert_eq!(again["failures"][0]["operator"], f["operator"]);
}

#[test]
fn verify_empty_is_vacuous_with_warning() {
    let dir = TempDir::new().unwrap();
    let o = verify(&dir, r#"{"instances": 0}"#);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}
