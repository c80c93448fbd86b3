use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Content hashes of what one stage read and wrote.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

/// Run record kept next to the artifacts. It holds hashes only, no paths or
/// timestamps, so identical inputs give an identical file wherever the
/// output directory lives.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    /// External inputs by role, over every recorded stage.
    pub inputs: BTreeMap<String, String>,
    /// Every recorded artifact by file name.
    pub artifacts: BTreeMap<String, String>,
    pub stages: BTreeMap<String, StageRecord>,
}

impl Manifest {
    pub fn new(config_hash: impl Into<String>) -> Self {
        Self {
            config_hash: config_hash.into(),
            ..Self::default()
        }
    }

    /// Reads `dir/manifest.json`; a missing or unreadable manifest is treated
    /// as empty so everything reruns.
    pub fn load(dir: &Path) -> Option<Self> {
        let bytes = fs::read(dir.join(MANIFEST_FILE)).ok()?;
        match serde_json::from_slice(&bytes) {
            Ok(m) => Some(m),
            Err(e) => {
                log::warn!("ignoring unreadable manifest in {}: {e}", dir.display());
                None
            }
        }
    }

    /// Whether `stage` can be skipped: recorded with the same inputs and every
    /// recorded output still on disk unchanged.
    pub fn is_current(&self, stage: &str, inputs: &BTreeMap<String, String>, dir: &Path) -> bool {
        let Some(rec) = self.stages.get(stage) else { return false };
        &rec.inputs == inputs
            && rec
                .outputs
                .iter()
                .all(|(name, sha)| fs::read(dir.join(name)).is_ok_and(|b| &sha256_hex(&b) == sha))
    }

    pub fn record(&mut self, stage: &str, record: StageRecord) {
        self.stages.insert(stage.to_string(), record);
        self.inputs.clear();
        self.artifacts.clear();
        let externals: Vec<(String, String)> = self
            .stages
            .values()
            .flat_map(|r| r.inputs.iter())
            .filter(|(k, _)| !self.stages.values().any(|s| s.outputs.contains_key(*k)))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        self.inputs.extend(externals);
        for rec in self.stages.values() {
            self.artifacts.extend(rec.outputs.iter().map(|(k, v)| (k.clone(), v.clone())));
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn save(&self, dir: &Path) -> Result<(), PipelineError> {
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, self.to_bytes()).map_err(|e| PipelineError::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(inputs: &[(&str, &str)], outputs: &[(&str, &str)]) -> StageRecord {
        let m = |v: &[(&str, &str)]| v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        StageRecord {
            inputs: m(inputs),
            outputs: m(outputs),
        }
    }

    #[test]
    fn summary_separates_external_inputs() {
        let mut m = Manifest::new("cfg");
        m.record("network", rec(&[("corpus", "c1")], &[("net.csv", "n1")]));
        m.record("backbone", rec(&[("net.csv", "n1")], &[("bb.csv", "b1")]));
        assert_eq!(m.inputs.keys().collect::<Vec<_>>(), ["corpus"]);
        assert_eq!(m.artifacts.len(), 2);
    }

    #[test]
    fn currency_tracks_inputs_and_files() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.csv"), b"x").unwrap();
        let mut m = Manifest::new("cfg");
        let inputs: BTreeMap<String, String> = [("corpus".to_string(), "c1".to_string())].into();
        m.record("s", StageRecord {
            inputs: inputs.clone(),
            outputs: [("a.csv".to_string(), sha256_hex(b"x"))].into(),
        });
        assert!(m.is_current("s", &inputs, dir.path()));
        let other: BTreeMap<String, String> = [("corpus".to_string(), "c2".to_string())].into();
        assert!(!m.is_current("s", &other, dir.path()));
        fs::write(dir.path().join("a.csv"), b"y").unwrap();
        assert!(!m.is_current("s", &inputs, dir.path()));
    }

    #[test]
    fn round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = Manifest::new("cfg");
        m.record("network", rec(&[("corpus", "c1")], &[("net.csv", "n1")]));
        m.save(dir.path()).unwrap();
        assert_eq!(Manifest::load(dir.path()), Some(m));
    }
}
