//! End-to-end tests of the `dwell` binary: report schema, exit codes, and
//! the CSV slice format.

use std::fs;
use std::process::{Command, Output};

use dwell::instance::DwpInstance;
use dwell::presets;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dwell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_instance(dir: &tempfile::TempDir, name: &str, inst: &DwpInstance) -> String {
    let path = dir.path().join(name);
    fs::write(&path, inst.save()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn solve_example1_schema_and_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_instance(&dir, "ex1.json", &presets::example1());
    let out = run(&["solve", &path]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "GlobalMinimum");
    assert!((report["sigma"].as_f64().unwrap() - 2.522).abs() < 1e-3);
    assert!((report["value"].as_f64().unwrap() + 49.109).abs() < 1e-3);
    let x = report["x"].as_array().unwrap();
    assert_eq!(x.len(), 1);
    assert!((x[0].as_f64().unwrap() + 7.748).abs() < 1e-3);
    let diag = &report["diagnostics"];
    assert_eq!(diag["reduction_branch"], "full-rank");
    assert!(diag["dual_iterations"].as_u64().unwrap() > 0);
    assert!(diag["gradient_residual"].as_f64().unwrap() < 1e-6);
    // Fields absent from this outcome are omitted, not null.
    assert!(report.get("sphere").is_none());
    assert!(report.get("certificate").is_none());
}

#[test]
fn solve_writes_report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_instance(&dir, "ex1.json", &presets::example1());
    let out_path = dir.path().join("report.json");
    let out = run(&["solve", &path, "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(report["status"], "GlobalMinimum");
}

#[test]
fn unbounded_instance_exits_2_with_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_instance(&dir, "unbounded.json", &presets::sdc_failure());
    let out = run(&["solve", &path]);
    assert_eq!(out.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "Unbounded");
    assert_eq!(report["certificate"]["direction"].as_array().unwrap().len(), 2);
}

#[test]
fn missing_and_malformed_inputs_exit_1() {
    let out = run(&["solve", "/nonexistent/instance.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, b"{ not json").unwrap();
    let out = run(&["solve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gl_generates_loadable_instance() {
    let out = run(&["gl", "1", "1", "8", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let inst = DwpInstance::load(&out.stdout).unwrap();
    assert_eq!(inst.n(), 4);
    assert!((inst.a()[(0, 0)] + 6.0).abs() < 1e-12);
    assert!((inst.constant_offset() - 4.0).abs() < 1e-12);

    // Invalid material constants are input errors.
    let out = run(&["gl", "1", "1", "0", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_example1_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_instance(&dir, "ex1.json", &presets::example1());
    let out = run(&["verify", &path, "--starts", "20", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0), "stdout: {}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn slice_csv_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_instance(&dir, "ex1.json", &presets::example1());
    let out = run(&["slice", &path, "--dims", "0", "--range", "-10:0", "--steps", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\r'), "expected LF line endings");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x1,value");
    assert_eq!(lines.len(), 12); // header + steps + 1 rows
    let inst = presets::example1();
    for row in &lines[1..] {
        let mut cols = row.split(',');
        let x: f64 = cols.next().unwrap().parse().unwrap();
        let v: f64 = cols.next().unwrap().parse().unwrap();
        let expect = inst
            .evaluate_objective(&nalgebra::dvector![x])
            .unwrap();
        assert!((v - expect).abs() <= 1e-9 * expect.abs().max(1.0));
    }

    // Two-dimensional slice carries both coordinates.
    let path2 = write_instance(&dir, "ex3.json", &presets::example3());
    let out = run(&["slice", &path2, "--dims", "0,1", "--range", "-2:2", "--steps", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x1,x2,value");
    assert_eq!(lines.len(), 1 + 5 * 5);

    // Out-of-range dims are input errors.
    let out = run(&["slice", &path, "--dims", "3", "--range", "-1:1", "--steps", "2"]);
    assert_eq!(out.status.code(), Some(1));
}
