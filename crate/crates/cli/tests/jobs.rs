use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/genus1.json")
}

fn derham(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_derham"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_on(cmd: &str, input: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--input", input.to_str().unwrap()];
    args.extend_from_slice(extra);
    derham(&args)
}

fn job(dir: &Path, v: &Value) -> PathBuf {
    let p = dir.join("job.json");
    fs::write(&p, serde_json::to_string(v).unwrap()).unwrap();
    p
}

fn parsed(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn cx(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn basis_report_has_standard_gram() {
    let v = parsed(&run_on("basis", &fixture(), &[]));
    assert_eq!(v["genus"], 1);
    assert_eq!(v["theta"].as_array().unwrap().len(), 1);
    let g = &v["gram"];
    let (re, im) = cx(&g[0][1]);
    assert!((re - 1.0).abs() < 1e-10 && im.abs() < 1e-10);
    let (re, _) = cx(&g[1][0]);
    assert!((re + 1.0).abs() < 1e-10);
}

#[test]
fn pairing_of_exact_form_vanishes() {
    let v = parsed(&run_on("pairing", &fixture(), &[]));
    for row in v["omega"].as_array().unwrap() {
        for z in row.as_array().unwrap() {
            let (re, im) = cx(z);
            assert!(re.hypot(im) < 1e-10);
        }
    }
}

#[test]
fn reduce_reports_function_and_differential() {
    let v = parsed(&run_on("reduce", &fixture(), &[]));
    assert!(v["f"]["r"]["roots"].is_array());
    assert!(v["reduced"].is_object());
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["basis", "pairing", "reduce", "ba"] {
        let a = dir.path().join(format!("{cmd}_a.json"));
        let b = dir.path().join(format!("{cmd}_b.json"));
        for out in [&a, &b] {
            let o = run_on(cmd, &fixture(), &["--steps", "50", "--t-end", "0.2", "--output", out.to_str().unwrap()]);
            assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
            assert!(o.stdout.is_empty());
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{cmd}");
    }
}

#[test]
fn flow_writes_trajectory_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let o = run_on("flow", &fixture(), &["--steps", "20", "--t-end", "0.1", "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 22);
    let m: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("traj.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(m["completed"], true);
    assert_eq!(m["scheme"], "rk4");
    assert_eq!(m["steps"], 20);
    assert!(m["error"].is_null());
}

#[test]
fn flow_json_format() {
    let v = parsed(&run_on("flow", &fixture(), &["--steps", "4", "--t-end", "0.1", "--format", "json"]));
    assert_eq!(v["states"].as_array().unwrap().len(), 5);
}

#[test]
fn zero_time_flow_gives_unit_psi() {
    let o = run_on("flow", &fixture(), &["--t-end", "0"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split(',').collect();
    let row: Vec<&str> = lines[1].split(',').collect();
    let at = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(at("psi0_re"), "1");
    assert_eq!(at("psi0_im"), "0");
    let v = parsed(&run_on("ba", &fixture(), &["--t-end", "0"]));
    assert_eq!(v["psi"][0]["psi"], json!([1.0, 0.0]));
}

#[test]
fn special_divisor_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = [[0.0, 0.0], [-1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]];
    let y = (0.5f64.powi(5) - 0.5).abs().sqrt();
    let input = job(dir.path(), &json!({ "P": p, "D": [[0.5, 0.0, 0.0, y], [0.5, 0.0, 0.0, -y]] }));
    let o = run_on("basis", &input, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("SpecialDivisor"));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let even = job(dir.path(), &json!({ "P": [[1.0, 0.0], [0.0, 0.0], [1.0, 0.0]], "D": [[1.0, 0.0, 1.0, 0.0]] }));
    let o = run_on("basis", &even, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("WrongDegreeParity"));

    let off = job(dir.path(), &json!({ "P": [[0.0, 0.0], [-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]], "D": [[2.0, 0.0, 1.0, 0.0]] }));
    let o = run_on("basis", &off, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NotOnCurve"));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run_on("basis", &bad, &[]).status.code(), Some(2));
    assert_eq!(derham(&["basis"]).status.code(), Some(2));
    assert_eq!(run_on("flow", &fixture(), &["--tol", "0.5"]).status.code(), Some(2));
    assert_eq!(run_on("reduce", &off, &[]).status.code(), Some(2));
    assert_ne!(derham(&["nonsense"]).status.code(), Some(0));
}

#[test]
fn aborted_flow_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = job(
        dir.path(),
        &json!({
            "P": [[0.0, 0.0], [-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
            "D": [[2.0, 0.0, 6f64.sqrt(), 0.0]],
            "D0": [[2.05, 0.0, (2.05f64.powi(3) - 2.05).sqrt(), 0.0]],
            "pp": [[-1.0, 0.0]],
        }),
    );
    let fwd = run_on("flow", &input, &["--steps", "2000", "--t-end", "20"]);
    let back = {
        let v: Value = serde_json::from_str(&fs::read_to_string(&input).unwrap()).unwrap();
        let mut v = v;
        v["pp"] = json!([[1.0, 0.0]]);
        job(dir.path(), &v)
    };
    let out = dir.path().join("t.csv");
    let rev = run_on("flow", &back, &["--steps", "2000", "--t-end", "20", "--output", out.to_str().unwrap()]);
    let (aborted, path_ok) = if fwd.status.code() == Some(3) { (fwd, None) } else { (rev, Some(out)) };
    assert_eq!(aborted.status.code(), Some(3), "{}", String::from_utf8_lossy(&aborted.stderr));
    if let Some(out) = path_ok {
        let m: Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("t.csv.manifest.json")).unwrap()).unwrap();
        assert_eq!(m["completed"], false);
        assert!(m["error"].is_string());
        assert!(fs::read_to_string(out).unwrap().lines().count() > 1);
    } else {
        assert!(String::from_utf8_lossy(&aborted.stdout).lines().count() > 1);
    }
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verify.json");
    let o = run_on("verify", &fixture(), &["--seed", "3", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
    let v: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["seed"], 3);
    assert!(v["results"].as_array().unwrap().len() >= 9);
}
