use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vogue(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vogue"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn small_fixture(dir: &Path) {
    let out = vogue(
        &["fixture", "--out", "fx", "--schools", "8", "--docs-per-school", "40", "--vogue-pairs", "3"],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_corpus_exits_2_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.conf"), "corpus = missing.jsonl\ninstitutions = missing.csv\n").unwrap();
    let out = vogue(&["run", "--config", "a.conf"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.jsonl"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.conf"), "corpus = c\ninstitutions = i\nalpha = 2\n").unwrap();
    let out = vogue(&["run", "--config", "a.conf"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
}

#[test]
fn regress_without_diffusion_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    small_fixture(dir.path());
    let out = vogue(&["run", "--config", "fx/vogue.conf", "--stage", "regress"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("flow.csv"));
}

#[test]
fn malformed_corpus_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    small_fixture(dir.path());
    fs::write(dir.path().join("fx/corpus.jsonl"), "{\"id\": 1}\n").unwrap();
    let out = vogue(&["run", "--config", "fx/vogue.conf"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn run_then_inspect() {
    let dir = tempfile::tempdir().unwrap();
    small_fixture(dir.path());
    let out = vogue(&["run", "--config", "fx/vogue.conf", "--out", "res", "--threads", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("res/manifest.json").exists());

    let again = vogue(&["run", "--config", "fx/vogue.conf", "--out", "res"], dir.path());
    assert!(String::from_utf8_lossy(&again.stdout).contains("up to date: network"));

    let shown = vogue(&["inspect", "res/labels.csv", "--limit", "2"], dir.path());
    let text = String::from_utf8_lossy(&shown.stdout);
    assert!(text.starts_with("institution  label"), "{text}");
    assert!(text.contains("more rows"));
    let json = vogue(&["inspect", "res/shares.json"], dir.path());
    assert!(String::from_utf8_lossy(&json.stdout).contains("\"core_periphery\""));
}

#[test]
fn unknown_stage_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = vogue(&["run", "--config", "x.conf", "--stage", "everything"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
