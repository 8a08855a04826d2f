use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn cutlocus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cutlocus")).args(args).output().expect("binary runs")
}

fn summary(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().last().unwrap_or_else(|| panic!("no stdout; stderr: {}", String::from_utf8_lossy(&out.stderr)));
    serde_json::from_str(line).expect("summary is JSON")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    dir
}

#[test]
fn closed_form_dimension() {
    let out = cutlocus(&["dim", "--k", "2", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let s = summary(&out)["s"].as_f64().unwrap();
    assert!((s - 1.46497).abs() < 5e-6);
}

#[test]
fn divergent_regime_is_refused() {
    let out = cutlocus(&["sequences", "--k", "2", "--show", "r"]);
    assert_eq!(out.status.code(), Some(2));
    let v = summary(&out);
    assert_eq!(v["status"], "error");
    assert_eq!(v["kind"], "divergent_series");
}

#[test]
fn overlapping_series_holes_are_refused() {
    let out = cutlocus(&["hull", "--depth", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(summary(&out)["kind"], "overlapping_holes");
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(cutlocus(&["--bogus", "dim"]).status.code(), Some(2));
    assert_eq!(cutlocus(&["tree", "--plane", "0", "9"]).status.code(), Some(2));
    assert_eq!(cutlocus(&["randers", "--c", "1.5"]).status.code(), Some(2));
}

#[test]
fn passing_commands_exit_0() {
    for args in [
        &["sequences", "--show", "all", "--count", "6"][..],
        &["tree", "--n", "3", "--depth", "3"],
        &["dim", "--k", "3", "--n", "6", "--boxcount", "--depth", "4"],
        &["hull", "--demo", "--n", "2"],
        &["hull", "--depth", "0"],
        &["cutlocus", "--demo", "--grid", "96"],
        &["cutlocus", "--demo", "--dilate", "--epsilon", "0.05", "--grid", "96"],
        &["smooth", "--demo"],
        &["smooth", "--n", "3"],
        &["randers", "--rays", "36", "--paths", "10"],
    ] {
        let out = cutlocus(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
        assert_eq!(summary(&out)["status"], "pass", "{args:?}");
    }
}

#[test]
fn nothing_written_without_out() {
    let dir = scratch("no-out");
    fs::create_dir_all(&dir).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cutlocus")).args(["tree", "--n", "3"]).current_dir(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read_dir(&dir).unwrap().count(), 0);
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let runs: Vec<PathBuf> = (0..2).map(|i| scratch(&format!("idem-{i}"))).collect();
    for dir in &runs {
        let d = dir.to_str().unwrap();
        for args in [
            &["sequences", "--show", "all", "--count", "8"][..],
            &["tree", "--n", "3", "--depth", "3"],
            &["dim", "--k", "3", "--n", "6", "--boxcount", "--depth", "4"],
            &["hull", "--demo", "--n", "3", "--mesh", "12"],
            &["cutlocus", "--demo", "--grid", "64"],
            &["smooth", "--demo", "--m-max", "10"],
            &["randers", "--rays", "24", "--paths", "8"],
        ] {
            let mut full = args.to_vec();
            full.extend(["--out", d]);
            assert_eq!(cutlocus(&full).status.code(), Some(0), "{full:?}");
        }
    }
    let mut names: Vec<_> = fs::read_dir(&runs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 10, "{names:?}");
    for name in names {
        let a = fs::read(runs[0].join(&name)).unwrap();
        let b = fs::read(runs[1].join(&name)).unwrap();
        assert!(a == b, "{name:?} differs between runs");
    }
}

#[test]
fn format_filter_limits_artifacts() {
    let dir = scratch("format");
    let out = cutlocus(&["tree", "--n", "3", "--format", "csv", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let names: Vec<String> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(names, vec!["tree.csv".to_string()]);
}

#[test]
fn verify_all_passes() {
    let out = cutlocus(&["verify-all", "--k", "3", "--depth", "2"]);
    let text = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert_eq!(summary(&out)["status"], "pass");
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 12, "{text}");
}
