// SPDX-License-Identifier: Apache-2.0

use std::process::{Command, Output};

fn hodet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hodet")).args(args).output().unwrap()
}

fn text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr)
}

#[test]
fn validate_only_prints_the_mode_report() {
    let out = hodet(&["--scenario", "harvesting", "--validate-only"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    let s = text(&out);
    assert!(s.contains("dt_max") && s.contains("100"), "{s}");
}

#[test]
fn unknown_scenario_is_a_config_error() {
    let out = hodet(&["--scenario", "nonsense", "--validate-only"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = hodet(&["--config", "/nonexistent/hodet.cfg", "--validate-only"]);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let file = tempfile::NamedTempFile::new().unwrap();
    let out = hodet(&["--scenario", "causality", "--out", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", text(&out));
}

#[test]
fn bad_overrides_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = hodet(&["--scenario", "harvesting", "--modes", "50,25", "--out", out_dir]);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out));
    let out = hodet(&["--scenario", "causality", "--modes", "4", "--out", out_dir]);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out));
}

#[test]
fn schedule_that_never_settles_exits_nonconvergent() {
    let dir = tempfile::tempdir().unwrap();
    let out = hodet(&[
        "--scenario",
        "harvesting",
        "--modes",
        "20,25",
        "--tolerance",
        "1e-12",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", text(&out));
}

#[test]
fn causality_run_writes_one_csv_per_mode_count() {
    let dir = tempfile::tempdir().unwrap();
    let out = hodet(&["--scenario", "causality", "--sweep", "10,13", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out));
    let mut names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["causality.json", "causality_n10.csv", "causality_n13.csv"]);
    let csv = std::fs::read_to_string(dir.path().join("causality_n10.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash: "));
    assert_eq!(lines.next().unwrap(), "tau_over_tauc,p_ground_neighbor,p_squeezed_neighbor");
}

#[test]
fn thermality_flags_exit_with_their_own_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = hodet(&[
        "--scenario",
        "unruh",
        "--modes",
        "4",
        "--sweep",
        "1.5,1.8",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let s = text(&out);
    assert_eq!(out.status.code(), Some(5), "{s}");
    assert!(s.contains("flag:"), "{s}");
    assert!(dir.path().join("unruh_unruh.csv").exists());
}
