use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn coarse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coarse")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn gen_line(dir: &Path, half: usize) -> PathBuf {
    let path = dir.join(format!("line{half}.json"));
    let out = coarse(&["gen", "line", "--half", &half.to_string(), "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    path
}

fn write_map(dir: &Path, name: &str, space: &Path, images: Vec<usize>) -> PathBuf {
    let space: Value = serde_json::from_str(&fs::read_to_string(space).unwrap()).unwrap();
    let path = dir.join(name);
    fs::write(&path, json!({ "source": space, "target": space, "images": images }).to_string()).unwrap();
    path
}

#[test]
fn line_profile_csv_has_one_surviving_class() {
    let dir = tempfile::tempdir().unwrap();
    let line = gen_line(dir.path(), 40);
    let out = coarse(&["profile", line.to_str().unwrap(), "--degrees", "0..1", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let last_degree_one = text.lines().rfind(|l| l.starts_with("1,")).unwrap();
    assert!(last_degree_one.ends_with(",1"), "{last_degree_one}");
    let degree_zero_final: Vec<&str> = text.lines().filter(|l| l.starts_with("0,")).collect();
    assert!(degree_zero_final.iter().all(|l| l.ends_with(",0")));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let line = gen_line(dir.path(), 30);
    for format in ["json", "csv", "svg"] {
        let args = ["profile", line.to_str().unwrap(), "--degrees", "0..1", "--format", format];
        assert_eq!(coarse(&args).stdout, coarse(&args).stdout, "{format}");
    }
}

#[test]
fn svg_matches_the_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let line = gen_line(dir.path(), 30);
    let csv = stdout(&coarse(&["profile", line.to_str().unwrap(), "--degrees", "0..1", "--format", "csv"]));
    let svg = stdout(&coarse(&["profile", line.to_str().unwrap(), "--degrees", "0..1", "--format", "svg"]));
    let rows = coarse_core::report::parse_profile_csv(&csv).unwrap();
    assert_eq!(svg, coarse_core::report::barcode_svg(&rows));
}

#[test]
fn mayer_vietoris_on_split_line_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let line = gen_line(dir.path(), 40);
    let out = coarse(&["mv-check", line.to_str().unwrap(), "--a", "x0<=0", "--b", "x0>=0", "--degrees", "0..1"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["command"], "mv-check");
    assert_eq!(report["result"]["exact"], true);
    assert_eq!(report["config"]["budget"], 2.0);
}

#[test]
fn parallel_lines_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let line = gen_line(dir.path(), 20);
    let out = coarse(&["excision-check", line.to_str().unwrap(), "--a", "x0<=-5", "--b", "x0>=5", "--within", "--budget", "6"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn empty_space_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    fs::write(
        &path,
        r#"{"points":[],"geometry":{"kind":"euclidean","coords":[]},"structure":{"kind":"bounded"},"frontier":[],"scale_cap":1}"#,
    )
    .unwrap();
    let out = coarse(&["profile", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn bad_arguments_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let line = gen_line(dir.path(), 10);
    assert_eq!(coarse(&["profile", line.to_str().unwrap(), "--field", "3"]).status.code(), Some(2));
    assert_eq!(coarse(&["profile", line.to_str().unwrap(), "--schedule", "4,2"]).status.code(), Some(2));
    assert_eq!(coarse(&["profile", "missing.json"]).status.code(), Some(2));
}

#[test]
fn shifted_identity_is_close_and_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let line = gen_line(dir.path(), 30);
    let n = 61;
    let id = write_map(dir.path(), "id.json", &line, (0..n).collect());
    let shift = write_map(dir.path(), "shift.json", &line, (0..n).map(|i| (i + 1).min(n - 1)).collect());
    let out = coarse(&["close-check", id.to_str().unwrap(), shift.to_str().unwrap(), "--degrees", "0..1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["result"]["agree"], true);

    let flip = write_map(dir.path(), "flip.json", &line, (0..n).rev().collect());
    let out = coarse(&["close-check", id.to_str().unwrap(), flip.to_str().unwrap(), "--degrees", "0..1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reflection_induces_an_isomorphism() {
    let dir = tempfile::tempdir().unwrap();
    let line = gen_line(dir.path(), 30);
    let flip = write_map(dir.path(), "flip.json", &line, (0..61).rev().collect());
    let out = coarse(&["map-check", flip.to_str().unwrap(), "--degrees", "0..1", "--field", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["result"]["coarse"]["coarse"], true);
    assert_eq!(report["result"]["induced"]["isomorphism"], true);
}

#[test]
fn fold_homotopy_and_cone_commands() {
    assert_eq!(coarse(&["homotopy-check", "--fold", "8"]).status.code(), Some(0));
    let out = coarse(&["cone", "--sphere0", "--degrees", "0..1"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["result"]["observed"], json!([0, 1]));
}
