use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn monogenic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monogenic")).args(args).output().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn poly_writes_json_with_degree() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s2.json");
    let out = monogenic(&[
        "poly", "--family", "S", "--ell", "2", "--m", "3", "--mu", "-1/2", "--alpha", "-7/2", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["degree"], 6);
    assert_eq!(doc["coeffs"].as_array().unwrap().len(), 7);
}

#[test]
fn check_reports_exact_agreement() {
    let out = monogenic(&["check", "--family", "K", "--ell", "6", "--m", "2", "--alpha", "-5", "--beta", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "recurrence == rodrigues: EXACT\n");
}

#[test]
fn validation_errors_are_single_lines() {
    let out = monogenic(&["poly", "--family", "S", "--ell", "-1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error:") && err.contains("ell must be >= 0"), "{err}");

    let out = monogenic(&["admissibility", "--family", "S", "--ell", "1", "--alpha", "-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("diverges"));

    let out = monogenic(&["fourier", "--family", "K", "--ell", "1", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("Usage"));
}

#[test]
fn reconstruct_round_trip_reports_error() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = dir.path().join("coeffs");
    let field = dir.path().join("field.csv");
    let rec = dir.path().join("rec.csv");
    let bump = monogenic::cwt::CwtField::gaussian_bump(monogenic::cwt::GridGeometry::new(24, 5.0).unwrap());
    fs::write(&field, bump.to_csv()).unwrap();
    let base = ["--family", "K", "--ell", "1"];
    let cwt: Vec<&str> = ["cwt"]
        .iter()
        .chain(&base)
        .chain(&["--input", field.to_str().unwrap(), "--scales", "0.25:4:8", "--out", coeffs.to_str().unwrap()])
        .copied()
        .collect();
    let out = monogenic(&cwt);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(Path::new(&coeffs.join("summary.json")).exists());
    let back: Vec<&str> = ["reconstruct"]
        .iter()
        .chain(&base)
        .chain(&[
            "--input",
            coeffs.to_str().unwrap(),
            "--out",
            rec.to_str().unwrap(),
            "--reference",
            field.to_str().unwrap(),
        ])
        .copied()
        .collect();
    let out = monogenic(&back);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let err = stderr(&out);
    let value: f64 = err.trim().strip_prefix("relative_l2_error: ").unwrap().parse().unwrap();
    assert!(value > 0.0 && value < 1.0);
}
