//! Config-driven pipeline: corpus to networks, backbones, vogue
//! categories, diffusion flows, journal overlap and regressions, with a
//! content-hash manifest so unchanged stages are skipped.

mod config;
mod manifest;
mod stages;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

pub use config::{PipelineConfig, DEFAULTS};
pub use manifest::{sha256_hex, Manifest, StageRecord, MANIFEST_FILE};
pub use stages::{LabelRow, TermRecord, VogueSummary};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("stage {stage} needs {artifact}, which has not been produced; run the earlier stages first")]
    MissingArtifact { stage: Stage, artifact: String },
    #[error("internal error: {0}")]
    Internal(String),
}

impl PipelineError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for configuration and I/O problems, 3 for invalid data or missing
    /// upstream artifacts, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io { .. } => 2,
            Self::Validation(_) | Self::MissingArtifact { .. } => 3,
            Self::Internal(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    All,
    Network,
    Backbone,
    Vogue,
    Diffusion,
    Journals,
    Regress,
}

impl Stage {
    /// Execution order of the concrete stages.
    pub const SEQUENCE: [Stage; 6] = [
        Stage::Network,
        Stage::Backbone,
        Stage::Vogue,
        Stage::Diffusion,
        Stage::Journals,
        Stage::Regress,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::All => "all",
            Stage::Network => "network",
            Stage::Backbone => "backbone",
            Stage::Vogue => "vogue",
            Stage::Diffusion => "diffusion",
            Stage::Journals => "journals",
            Stage::Regress => "regress",
        }
    }

    fn expand(self) -> Vec<Stage> {
        match self {
            Stage::All => Self::SEQUENCE.to_vec(),
            s => vec![s],
        }
    }

    /// Files this stage writes into the output directory.
    pub fn artifacts(self) -> &'static [&'static str] {
        match self {
            Stage::All => &[],
            Stage::Network => &["terms.jsonl", "network_t1.csv", "network_t2.csv"],
            Stage::Backbone => &["backbone_t1.csv", "backbone_t2.csv"],
            Stage::Vogue => &["categories.csv", "vogue_report.json"],
            Stage::Diffusion => &["flow.csv", "labels.csv", "shares.json", "flow.dot"],
            Stage::Journals => &["journals.csv"],
            Stage::Regress => &["dyads.csv", "models.json", "models.csv"],
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        std::iter::once(Stage::All)
            .chain(Stage::SEQUENCE)
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown stage {s:?}; expected all, network, backbone, vogue, diffusion, journals or regress"))
    }
}

/// Which stages did work and which were already current.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunReport {
    pub ran: Vec<Stage>,
    pub skipped: Vec<Stage>,
    pub manifest: Manifest,
}

/// Where a stage input comes from.
enum Source<'a> {
    External(&'a Path),
    Artifact(&'static str),
}

/// Declared inputs of each stage, by manifest name.
fn declared_inputs<'a>(cfg: &'a PipelineConfig, stage: Stage) -> Vec<(&'static str, Source<'a>)> {
    use Source::*;
    let mut v = Vec::new();
    let text_overrides = |v: &mut Vec<(&'static str, Source<'a>)>| {
        if let Some(p) = &cfg.stopwords {
            v.push(("stopwords", External(p)));
        }
        if let Some(p) = &cfg.lemmas {
            v.push(("lemmas", External(p)));
        }
    };
    match stage {
        Stage::All => {}
        Stage::Network => {
            v.push(("corpus", External(&cfg.corpus)));
            text_overrides(&mut v);
        }
        Stage::Backbone => {
            v.push(("network_t1.csv", Artifact("network_t1.csv")));
            v.push(("network_t2.csv", Artifact("network_t2.csv")));
        }
        Stage::Vogue => {
            v.push(("backbone_t1.csv", Artifact("backbone_t1.csv")));
            v.push(("backbone_t2.csv", Artifact("backbone_t2.csv")));
        }
        Stage::Diffusion => {
            v.push(("institutions", External(&cfg.institutions)));
            v.push(("categories.csv", Artifact("categories.csv")));
            v.push(("terms.jsonl", Artifact("terms.jsonl")));
        }
        Stage::Journals => {
            v.push(("corpus", External(&cfg.corpus)));
            v.push(("categories.csv", Artifact("categories.csv")));
            if let Some(p) = &cfg.journals {
                v.push(("journals", External(p)));
            }
            text_overrides(&mut v);
        }
        Stage::Regress => {
            v.push(("institutions", External(&cfg.institutions)));
            v.push(("flow.csv", Artifact("flow.csv")));
            v.push(("labels.csv", Artifact("labels.csv")));
            v.push(("terms.jsonl", Artifact("terms.jsonl")));
        }
    }
    v
}

/// Runs `stage` (or every stage) under `cfg`, skipping stages whose inputs
/// and outputs match the manifest. External inputs of every requested stage
/// are checked before anything is written.
pub fn run(cfg: &PipelineConfig, stage: Stage) -> Result<RunReport, PipelineError> {
    cfg.validate()?;
    let stages = stage.expand();
    for &s in &stages {
        for (_, src) in declared_inputs(cfg, s) {
            if let Source::External(path) = src {
                fs::metadata(path).map_err(|e| PipelineError::io(path, e))?;
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| PipelineError::Internal(format!("cannot start worker threads: {e}")))?;
    pool.install(|| run_stages(cfg, &stages))
}

fn run_stages(cfg: &PipelineConfig, stages: &[Stage]) -> Result<RunReport, PipelineError> {
    let out = &cfg.out;
    let config_hash = cfg.hash();
    let mut manifest = Manifest::load(out)
        .filter(|m| m.config_hash == config_hash)
        .unwrap_or_else(|| Manifest::new(config_hash));
    let mut report = RunReport::default();

    for &stage in stages {
        let mut bytes: BTreeMap<&'static str, Vec<u8>> = BTreeMap::new();
        let mut hashes = BTreeMap::new();
        for (name, src) in declared_inputs(cfg, stage) {
            let data = match src {
                Source::External(path) => fs::read(path).map_err(|e| PipelineError::io(path, e))?,
                Source::Artifact(file) => {
                    let path = out.join(file);
                    match fs::read(&path) {
                        Ok(b) => b,
                        Err(e) if e.kind() == io::ErrorKind::NotFound => {
                            return Err(PipelineError::MissingArtifact {
                                stage,
                                artifact: file.to_string(),
                            })
                        }
                        Err(e) => return Err(PipelineError::io(&path, e)),
                    }
                }
            };
            hashes.insert(name.to_string(), sha256_hex(&data));
            bytes.insert(name, data);
        }

        if manifest.is_current(stage.as_str(), &hashes, out) {
            log::info!("{stage}: up to date");
            report.skipped.push(stage);
            continue;
        }
        log::info!("{stage}: running");
        let outputs = stages::execute(stage, cfg, &bytes)?;
        debug_assert_eq!(
            outputs.iter().map(|(n, _)| *n).collect::<Vec<_>>(),
            stage.artifacts(),
        );

        fs::create_dir_all(out).map_err(|e| PipelineError::io(out, e))?;
        let mut record = StageRecord {
            inputs: hashes,
            outputs: BTreeMap::new(),
        };
        for (name, data) in outputs {
            let path = out.join(name);
            fs::write(&path, &data).map_err(|e| PipelineError::io(&path, e))?;
            record.outputs.insert(name.to_string(), sha256_hex(&data));
        }
        manifest.record(stage.as_str(), record);
        manifest.save(out)?;
        report.ran.push(stage);
    }
    report.manifest = manifest;
    Ok(report)
}
