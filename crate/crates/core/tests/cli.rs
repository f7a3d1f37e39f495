use std::fs;
use std::process::Command;

use afseg::{read_pgm, IntensityImage};

fn afseg(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_afseg")).args(args).output().unwrap()
}

#[test]
fn converged_run_exits_zero_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let r = afseg(&["--synthetic", "rhombus", "--nodes", "62", "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("converged=true"));
    assert!(report.contains("N_i="));
    let mask = read_pgm(&fs::read(out.join("mask.pgm")).unwrap()).unwrap();
    assert_eq!((mask.width, mask.height), (62, 62));
    assert!(mask.samples.iter().all(|&s| s == 0 || s == 255));
    let front = IntensityImage::read(out.join("front.pgm")).unwrap();
    assert!(front.samples.contains(&255));
    let csv = fs::read_to_string(out.join("errors.csv")).unwrap();
    assert!(csv.starts_with("iter,E,P_err_rel,P_err_1,seconds\n"));
}

#[test]
fn non_convergence_exits_two() {
    let r = afseg(&["--synthetic", "circle", "--nodes", "42", "--nmax", "2"]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stdout).contains("converged=false"));
}

#[test]
fn usage_and_input_errors_exit_one() {
    for args in [
        &[][..],
        &["--synthetic", "rhombus", "--image", "x.pgm"][..],
        &["--synthetic", "rhombus", "--frobnicate"][..],
        &["--image", "/does/not/exist.pgm"][..],
        &["--synthetic", "rhombus", "--lambda", "0.7"][..],
    ] {
        let r = afseg(args);
        assert_eq!(r.status.code(), Some(1), "{args:?}");
        assert!(!r.stderr.is_empty());
    }
}

#[test]
fn flat_image_with_c2_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.pgm");
    IntensityImage::new(30, 30, 255, vec![128; 900]).unwrap().write(&path).unwrap();
    let r = afseg(&["--image", path.to_str().unwrap(), "--velocity", "c2"]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let r = afseg(&["--help"]);
    assert_eq!(r.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&r.stdout).contains("--synthetic"));
}
