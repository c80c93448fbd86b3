use std::fs;
use std::path::Path;

use vogue_core::fixture::{make_fixture, FixtureParams};
use vogue_core::pipeline::{run, sha256_hex, Manifest, PipelineConfig, Stage, MANIFEST_FILE};

fn setup(dir: &Path, params: &FixtureParams) -> PipelineConfig {
    make_fixture(params).write_to(dir).unwrap();
    PipelineConfig::load(&dir.join("vogue.conf")).unwrap()
}

fn small() -> FixtureParams {
    FixtureParams {
        schools: 8,
        docs_per_school: 60,
        vogue_pairs: 4,
        foundation_pairs: 3,
        ..FixtureParams::default()
    }
}

#[test]
fn full_run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), &small());
    let report = run(&cfg, Stage::All).unwrap();
    assert_eq!(report.ran, Stage::SEQUENCE);

    let mut files: Vec<String> = fs::read_dir(&cfg.out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    let mut expected: Vec<&str> = Stage::SEQUENCE.iter().flat_map(|s| s.artifacts().iter().copied()).collect();
    expected.push(MANIFEST_FILE);
    expected.sort();
    assert_eq!(files, expected);

    // manifest checksums match the files on disk
    let m = Manifest::load(&cfg.out).unwrap();
    assert_eq!(m.artifacts.len(), 15);
    for (name, sha) in &m.artifacts {
        assert_eq!(&sha256_hex(&fs::read(cfg.out.join(name)).unwrap()), sha, "{name}");
    }
    assert_eq!(m.inputs.keys().collect::<Vec<_>>(), ["corpus", "institutions", "journals"]);
    // stage isolation: regress never reads the corpus
    assert!(!m.stages["regress"].inputs.contains_key("corpus"));
    assert!(m.stages["backbone"].inputs.keys().all(|k| k.starts_with("network_")));

    let models: serde_json::Value = serde_json::from_slice(&fs::read(cfg.out.join("models.json")).unwrap()).unwrap();
    assert_eq!(models["models"].as_array().unwrap().len(), 13);
    assert_eq!(models["school_models"].as_array().unwrap().len(), 2);
}

#[test]
fn rerun_skips_and_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), &small());
    run(&cfg, Stage::All).unwrap();
    let first = fs::read(cfg.out.join(MANIFEST_FILE)).unwrap();
    let again = run(&cfg, Stage::All).unwrap();
    assert_eq!(again.skipped, Stage::SEQUENCE);
    assert_eq!(fs::read(cfg.out.join(MANIFEST_FILE)).unwrap(), first);

    // a changed parameter reruns everything into a different manifest
    let mut looser = cfg.clone();
    looser.alpha = 0.2;
    let changed = run(&looser, Stage::All).unwrap();
    assert_eq!(changed.ran, Stage::SEQUENCE);
    assert_ne!(fs::read(cfg.out.join(MANIFEST_FILE)).unwrap(), first);
}

#[test]
fn thread_count_and_location_do_not_matter() {
    let dir = tempfile::tempdir().unwrap();
    let base = setup(dir.path(), &small());
    let mut manifests = Vec::new();
    for threads in [1, 4] {
        let mut cfg = base.clone();
        cfg.threads = threads;
        cfg.out = dir.path().join(format!("out{threads}"));
        run(&cfg, Stage::All).unwrap();
        manifests.push(fs::read(cfg.out.join(MANIFEST_FILE)).unwrap());
    }
    assert_eq!(manifests[0], manifests[1]);
}

#[test]
fn stages_run_one_at_a_time() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), &small());
    let err = run(&cfg, Stage::Vogue).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("backbone_t1.csv"));
    for s in Stage::SEQUENCE {
        assert_eq!(run(&cfg, s).unwrap().ran, [s]);
    }
    let staged = fs::read(cfg.out.join(MANIFEST_FILE)).unwrap();

    let other = tempfile::tempdir().unwrap();
    let mut all = cfg.clone();
    all.out = other.path().join("out");
    run(&all, Stage::All).unwrap();
    assert_eq!(fs::read(all.out.join(MANIFEST_FILE)).unwrap(), staged);
}

#[test]
fn unknown_institution_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = setup(dir.path(), &small());
    let text = fs::read_to_string(&cfg.institutions).unwrap();
    let kept: Vec<&str> = text.lines().filter(|l| !l.starts_with("U001,")).collect();
    fs::write(&cfg.institutions, kept.join("\n") + "\n").unwrap();
    let err = run(&cfg, Stage::All).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
    assert!(err.to_string().contains("U001"), "{err}");
}
