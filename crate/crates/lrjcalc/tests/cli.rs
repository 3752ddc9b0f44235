//! End-to-end checks of the binary: exit codes, answer lines, filtering,
//! report shape, and the seed fallback.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("corpus")
        .join(name)
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lrjcalc-cli-{}-{tag}", std::process::id()));
    fs::create_dir_all(&dir).expect("scratch directory");
    dir
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lrjcalc"));
    cmd.env_remove("LRJCALC_SEED");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn check_passes_on_well_formed_input() {
    let path = corpus("v02_standard_contact.geo");
    let out = run(&["check", path.to_str().unwrap(), "--seed", "5"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("C.contact.unit_pairing"), "{text}");
    assert!(text.contains("L.lift.structure_equation"), "{text}");
    assert!(text.trim_end().ends_with("overall: pass"), "{text}");
}

#[test]
fn check_reports_failing_rows_with_exit_one() {
    let dir = scratch("fail");
    let input = dir.join("broken.geo");
    fs::write(
        &input,
        "chart R3 (x, y, z);\n\
         form a : 1 on D = 0;\n\
         form W : 2 on D = dx ^ dy + u ^ dz;\n\
         lrj S { alpha = a; omega = W; }\n\
         check S;\n",
    )
    .unwrap();
    let out = run(&["check", input.to_str().unwrap(), "--seed", "5"], &[]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("failed         S.lrj.structure_equation"), "{text}");
    assert!(text.contains("witness: component [0, 1, 2]"), "{text}");
    assert!(text.trim_end().ends_with("overall: fail"), "{text}");
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn parse_errors_exit_two_with_position() {
    let path = corpus("e01_stray_character.geo");
    let out = run(&["check", path.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3, column 14"), "{}", stderr(&out));

    let missing = run(&["check", "/no/such/file.geo"], &[]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn answer_commands_print_single_results() {
    let path = corpus("v03_cosymplectic_lift.geo");
    let file = path.to_str().unwrap();

    let reeb = run(&["reeb", file, "--structure", "L", "--seed", "5"], &[]);
    assert_eq!(reeb.status.code(), Some(0), "{}", stderr(&reeb));
    assert_eq!(stdout(&reeb).trim(), "H = d/dz");

    let classify = run(&["classify", file, "--structure", "L", "--seed", "5"], &[]);
    assert_eq!(classify.status.code(), Some(0), "{}", stderr(&classify));
    assert_eq!(stdout(&classify).trim(), "nonexact");

    let v02 = corpus("v02_standard_contact.geo");
    let bracket = run(
        &["bracket", v02.to_str().unwrap(), "f=x", "g=y", "--structure", "L", "--seed", "5"],
        &[],
    );
    assert_eq!(bracket.status.code(), Some(0), "{}", stderr(&bracket));
    assert_eq!(stdout(&bracket).trim(), "-1");
}

#[test]
fn only_globs_filter_rows() {
    let path = corpus("v02_standard_contact.geo");
    let out = run(
        &["check", path.to_str().unwrap(), "--seed", "5", "--only", "*.contact.*"],
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("contact.unit_pairing"), "{text}");
    assert!(!text.contains(".lift."), "{text}");
}

#[test]
fn report_has_the_documented_shape_and_env_seed_matches_flag() {
    let dir = scratch("report");
    let path = corpus("v02_standard_contact.geo");
    let file = path.to_str().unwrap();
    let by_flag = dir.join("flag.json");
    let by_env = dir.join("env.json");

    let a = run(
        &["check", file, "--seed", "99", "--report", by_flag.to_str().unwrap()],
        &[],
    );
    let b = run(
        &["check", file, "--report", by_env.to_str().unwrap()],
        &[("LRJCALC_SEED", "99")],
    );
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(b.status.code(), Some(0));
    assert_eq!(fs::read(&by_flag).unwrap(), fs::read(&by_env).unwrap());

    let value: serde_json::Value =
        serde_json::from_slice(&fs::read(&by_flag).unwrap()).expect("valid JSON");
    for key in ["tool", "version", "chart", "seed", "samples", "tolerance", "checks", "overall"] {
        assert!(value.get(key).is_some(), "missing key {key}");
    }
    assert_eq!(value["tool"], "lrjcalc");
    assert_eq!(value["seed"], 99);
    assert_eq!(value["overall"], "pass");
    let checks = value["checks"].as_array().expect("checks array");
    assert!(!checks.is_empty());
    for row in checks {
        assert!(row.get("check").is_some() && row.get("formula").is_some());
        assert_eq!(row["millis"], 0);
    }
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn sabotage_flag_makes_selftest_fail_and_name_the_property() {
    let ok = run(&["selftest", "--seed", "3", "--cases", "4"], &[]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert!(stdout(&ok).contains("selftest passed (seed 3)"));

    let bad = run(
        &["selftest", "--seed", "3", "--cases", "4", "--sabotage-wedge-sign"],
        &[],
    );
    assert_eq!(bad.status.code(), Some(1));
    assert!(
        stdout(&bad).contains("wedge.graded_commutativity"),
        "{}",
        stdout(&bad)
    );
}
