use std::io::Write;
use std::process::{Command, Output};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");

fn nlg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlg")).args(args).output().expect("nlg runs")
}

fn stdout(args: &[&str]) -> String {
    let out = nlg(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fixture(name: &str) -> String {
    format!("{FIXTURES}/{name}")
}

/// Data rows as vectors of fields, header dropped.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn last_field(csv: &str) -> f64 {
    rows(csv).last().unwrap().last().unwrap().parse().unwrap()
}

#[test]
fn constants_rows() {
    let out = stdout(&["constants", "--d", "1", "--p", "1"]);
    assert_eq!(out.lines().next().unwrap(), "d,p,C_p,G_dp,gamma_limit_constant");
    assert!((last_field(&out) - 1.3862944).abs() < 1e-7);
    assert_eq!(last_field(&stdout(&["constants", "--d", "1", "--p", "2"])), 0.5);
    let v = last_field(&stdout(&["constants", "--d", "2", "--p", "2"]));
    assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-11);
}

#[test]
fn lambda_fixtures() {
    let run = |name: &str, p: &str| stdout(&["lambda", "--input", &fixture(name), "--delta", "0.1", "--p", p]);
    assert_eq!(run("staircase3.json", "2"), "lambda\n0.01\n");
    assert_eq!(run("constant.json", "1.5"), "lambda\n0\n");
    assert_eq!(run("adjacent_jump.json", "1"), "lambda\ninf\n");
}

#[test]
fn lambda_on_piecewise_affine_input() {
    let q = stdout(&["lambda", "--input", &fixture("ramp.json"), "--delta", "0.5", "--p", "1", "--tol", "1e-8"]);
    assert_eq!(q.lines().next().unwrap(), "lambda,error_estimate");
    let v: f64 = rows(&q)[0][0].parse().unwrap();
    assert!((v - (1.0 - std::f64::consts::LN_2)).abs() < 1e-8);
    // Tent of height 1 segmented at δ = 1/4: exact staircase value.
    let s = stdout(&["lambda", "--input", &fixture("tent.json"), "--delta", "0.25", "--p", "2", "--segment"]);
    assert!(last_field(&s) > 0.0);
    let unbounded = nlg(&["lambda", "--input", &fixture("tent.json"), "--delta", "0.25", "--p", "2"]);
    assert!(!unbounded.status.success());
}

#[test]
fn segment_writes_step_function_json() {
    let out = stdout(&["segment", "--input", &fixture("tent.json"), "--delta", "0.5"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["values"], serde_json::json!([0.0, 0.5, 0.5, 0.0]));
    assert_eq!(v["tail_mode"], "compact_support");
}

#[test]
fn rearrange_and_hostility() {
    let arr = fixture("arrangement.json");
    assert_eq!(stdout(&["rearrange", "--input", &arr]), "{\"species\":[0,0,1,2,2,3]}\n");
    let step = stdout(&["rearrange", "--input", &fixture("staircase3.json")]);
    assert!(step.contains("\"values\":[0.0,0.1,0.2]"));
    let out = stdout(&[
        "hostility", "--input", &arr, "--weights", &fixture("weights.json"), "--enemies", &fixture("enemies.json"),
        "--brute-force",
    ]);
    let r = &rows(&out)[0];
    let v: Vec<f64> = r.iter().map(|s| s.parse().unwrap()).collect();
    assert!(v[0] >= v[1] && v[1] == v[2], "{out}");
    let semi = stdout(&["hostility", "--input", &fixture("staircase3.json"), "--delta", "0.1", "--p", "2"]);
    assert_eq!(semi, "hostility,monotone_hostility\n0.01,0.01\n");
}

#[test]
fn fuzz_reports_zero_violations() {
    assert_eq!(stdout(&["fuzz", "--n-max", "2"]).lines().nth(1).unwrap().split(',').nth(1), Some("0"));
    let flat = stdout(&["fuzz", "--n-max", "6", "--species-max", "3", "--trials", "1", "--weights", "flat"]);
    assert!(flat.ends_with(",0\n"));
}

#[test]
fn recovery_tables() {
    let out = stdout(&["converge-recovery", "--shape", "ramp", "--p", "2", "--delta-start", "0.01", "--delta-factor", "0.1", "--steps", "3"]);
    let r = rows(&out);
    assert_eq!(r.len(), 4);
    assert_eq!(r[3][0], "0");
    assert!((r[3][1].parse::<f64>().unwrap() - 0.5).abs() < 1e-6);
    let single = stdout(&["converge-recovery", "--shape", "tent", "--p", "1", "--delta-start", "0.1", "--steps", "1"]);
    assert_eq!(rows(&single).len(), 1);
}

#[test]
fn tent_ratio_tends_to_one() {
    let out = stdout(&["converge-recovery", "--shape", "tent", "--p", "1", "--delta-start", "0.0625", "--steps", "11"]);
    let r = rows(&out);
    let ratios: Vec<f64> = r[..r.len() - 1].iter().map(|row| row[3].parse().unwrap()).collect();
    assert!(ratios[2..].windows(2).all(|w| (w[1] - 1.0).abs() < (w[0] - 1.0).abs()));
    let extrapolated: f64 = r.last().unwrap()[1].parse().unwrap();
    assert!((extrapolated - 4.0 * std::f64::consts::LN_2).abs() < 1e-3);
}

#[test]
fn sectioning_table_for_constant_shape() {
    let out = stdout(&["converge-sectioning", "--shape", "constant", "--delta", "0.2", "--p", "2", "--mc-samples", "1000"]);
    assert_eq!(out, "delta,sectioning_estimate,mc_estimate,mc_stderr,limit\n0.2,0,0,0,0\n");
}

#[test]
fn usage_and_input_errors() {
    let unknown = nlg(&["constants", "--p", "2", "--frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(!nlg(&["constants", "--p", "0.5"]).status.success());
    assert!(!nlg(&["converge-sectioning", "--d", "3", "--delta", "0.2", "--p", "2"]).status.success());
    let mut bad = tempfile::NamedTempFile::new().unwrap();
    write!(bad, "{{\"breakpoints\": [0.0, 2.0, 1.0], \"values\": [0.0, 1.0], \"tail_mode\": \"domain_only\"}}").unwrap();
    let out = nlg(&["lambda", "--input", bad.path().to_str().unwrap(), "--delta", "0.1", "--p", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("strictly increasing"));
}
