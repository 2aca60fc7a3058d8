//! Run manifests: enough provenance to replay a command and check that it
//! reproduces the same bytes.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool_version: String,
    /// Full argument vector, program name excluded.
    pub args: Vec<String>,
    pub cwd: PathBuf,
    /// SHA-256 of the config file, when the command took one.
    pub config_hash: Option<String>,
    pub base_seed: Option<u64>,
    pub threads: usize,
    /// SHA-256 per input file, keyed by the path as given.
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 per output file, keyed by the path relative to the output directory.
    pub outputs: BTreeMap<String, String>,
    pub started_unix: u64,
    pub finished_unix: u64,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_NAME);
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n").with_context(|| format!("writing {}", path.display()))
    }

    /// Inputs whose current digest differs from the recorded one, resolved
    /// against the recorded working directory.
    pub fn stale_inputs(&self) -> Result<Vec<String>> {
        let mut stale = Vec::new();
        for (p, digest) in &self.inputs {
            let path = self.cwd.join(p);
            match sha256_file(&path) {
                Ok(d) if &d == digest => {}
                _ => stale.push(p.clone()),
            }
        }
        Ok(stale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_and_detects_stale_inputs() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("in.csv"), "1,2\n").unwrap();
        let mut inputs = BTreeMap::new();
        inputs.insert("in.csv".to_string(), sha256_file(&dir.path().join("in.csv")).unwrap());
        let m = RunManifest {
            tool_version: "0".into(),
            args: vec!["randmat".into()],
            cwd: dir.path().to_path_buf(),
            config_hash: None,
            base_seed: Some(3),
            threads: 1,
            inputs,
            outputs: BTreeMap::new(),
            started_unix: 1,
            finished_unix: 2,
        };
        m.write(dir.path()).unwrap();
        assert_eq!(RunManifest::read(&dir.path().join(MANIFEST_NAME)).unwrap(), m);
        assert!(m.stale_inputs().unwrap().is_empty());
        assert_eq!(sha256_file(&dir.path().join("in.csv")).unwrap(), "52186c933993da4082b3cdc7c40bb4bf735b391ff54a2ef78c037dda6c38a680");
        std::fs::write(dir.path().join("in.csv"), "1,3\n").unwrap();
        assert_eq!(m.stale_inputs().unwrap(), ["in.csv"]);
    }
}
