//! End-to-end checks of the `quantest` binary: exit codes, report
//! schema, and deterministic power output.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use quantest::io::RunReport;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quantest"))
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn identical_inputs_give_null_report() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.csv");
    let data: String = (0..50).map(|i| format!("{}\n", i as f64 * 0.1)).collect();
    write(&f, &data);
    let out = bin().args(["test", "--input"]).arg(&f).arg(&f).output().unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = RunReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.statistic, 0.0);
    assert_eq!(report.p_value, 1.0);
    assert!(!report.reject);
    assert_eq!(report.schema_version, "1");
    assert_eq!(report.groups.len(), 2);
}

#[test]
fn single_input_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.csv");
    write(&f, "1\n2\n3\n");
    let out = bin().args(["test", "--input"]).arg(&f).output().unwrap();
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("two groups"), "stderr: {stderr}");
}

#[test]
fn bad_alpha_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.csv");
    write(&f, "1\n2\n3\n");
    let out = bin()
        .args(["test", "--alpha", "1.5", "--input"])
        .arg(&f)
        .arg(&f)
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn missing_file_is_usage_error() {
    let out = bin()
        .args(["test", "--input", "/no/such/a.csv", "/no/such/b.csv"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn parse_error_names_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.csv");
    write(&f, "1\nbogus\n3\n");
    let out = bin().args(["test", "--input"]).arg(&f).arg(&f).output().unwrap();
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("row 2"), "stderr: {stderr}");
}

#[test]
fn degenerate_density_is_numeric_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.csv");
    let data: String = (0..50)
        .map(|i| {
            if i % 2 == 0 {
                format!("{}\n", -100.0 + i as f64 * 1e-3)
            } else {
                format!("{}\n", 100.0 + i as f64 * 1e-3)
            }
        })
        .collect();
    write(&f, &data);
    let out = bin()
        .args(["test", "--kernel", "epanechnikov", "--bandwidth-const", "0.001", "--input"])
        .arg(&f)
        .arg(&f)
        .output()
        .unwrap();
    assert_eq!(code(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn grouped_mode_and_text_format() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("grouped.csv");
    let mut data = String::from("group,value\n");
    for i in 0..30 {
        data.push_str(&format!("a,{}\n", i as f64 * 0.1));
        data.push_str(&format!("b,{}\n", 5.0 + i as f64 * 0.1));
    }
    write(&f, &data);
    let out = bin()
        .args(["test", "--format", "text", "--grouped"])
        .arg(&f)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("reject H0"), "stdout: {stdout}");
    assert!(stdout.contains("p-value"));
}

#[test]
fn power_grid_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("p1.csv");
    let out2 = dir.path().join("p2.csv");
    let args = |out: &Path| {
        vec![
            "power".to_string(),
            "--family".into(),
            "normal".into(),
            "--n".into(),
            "100".into(),
            "--deltas".into(),
            "0:0.5:0.25".into(),
            "--reps".into(),
            "50".into(),
            "--seed".into(),
            "5".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    let r1 = bin().args(args(&out1)).env("QUANTEST_THREADS", "1").output().unwrap();
    assert_eq!(code(&r1), 0, "stderr: {}", String::from_utf8_lossy(&r1.stderr));
    let r2 = bin().args(args(&out2)).env("QUANTEST_THREADS", "4").output().unwrap();
    assert_eq!(code(&r2), 0);

    let c1 = fs::read(&out1).unwrap();
    let c2 = fs::read(&out2).unwrap();
    assert_eq!(c1, c2, "power CSV differs across worker counts");

    let text = String::from_utf8(c1).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "delta,power,mc_stderr,errors");
    assert_eq!(lines.len(), 4, "expected 3 data rows, got: {text}");
}

#[test]
fn power_svg_written() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p.csv");
    let svg = dir.path().join("p.svg");
    let out = bin()
        .args(["power", "--n", "100", "--deltas", "0:0.4:0.2", "--reps", "20", "--out"])
        .arg(&csv)
        .arg("--svg")
        .arg(&svg)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let body = fs::read_to_string(&svg).unwrap();
    assert!(body.starts_with("<svg"));
    assert!(body.contains("polyline"));
}

#[test]
fn bad_deltas_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["power", "--deltas", "0:0.5", "--out"])
        .arg(dir.path().join("x.csv"))
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}
