use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Stage;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

/// What one stage read and wrote. Paths are relative to the output
/// directory when they live inside it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StageRecord {
    pub config_hash: String,
    pub seed: u64,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub stages: BTreeMap<String, StageRecord>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl Manifest {
    pub fn load(output_dir: &Path) -> Result<Manifest> {
        let path = output_dir.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(Manifest::default());
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, output_dir: &Path) -> Result<()> {
        let path = output_dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }

    /// Fails unless `producer` ran with `config_hash` and `file` (relative
    /// to `output_dir`) still has the content it wrote.
    pub fn check_artifact(&self, output_dir: &Path, producer: Stage, config_hash: &str, file: &str) -> Result<()> {
        let stale = |detail: String| Error::StaleArtifact {
            stage: producer.name().to_string(),
            detail,
        };
        let Some(record) = self.stages.get(producer.name()) else {
            return Err(stale(format!("`{file}` has not been produced yet")));
        };
        if record.config_hash != config_hash {
            return Err(stale("configuration changed since it ran".into()));
        }
        let Some(expected) = record.outputs.get(file) else {
            return Err(stale(format!("it did not record `{file}`")));
        };
        let path = output_dir.join(file);
        if !path.exists() {
            return Err(stale(format!("`{file}` is missing")));
        }
        if &sha256_file(&path)? != expected {
            return Err(stale(format!("`{file}` was modified after it ran")));
        }
        Ok(())
    }
}

/// Collects hashes while a stage runs.
#[derive(Debug)]
pub struct StageLog {
    output_dir: PathBuf,
    record: StageRecord,
}

impl StageLog {
    pub fn new(output_dir: &Path, config_hash: String, seed: u64) -> Self {
        StageLog {
            output_dir: output_dir.to_path_buf(),
            record: StageRecord {
                config_hash,
                seed,
                ..StageRecord::default()
            },
        }
    }

    fn key(&self, path: &Path) -> String {
        path.strip_prefix(&self.output_dir)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/")
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let h = sha256_file(path)?;
        let k = self.key(path);
        self.record.inputs.insert(k, h);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> Result<()> {
        let h = sha256_file(path)?;
        let k = self.key(path);
        self.record.outputs.insert(k, h);
        Ok(())
    }

    /// Stores the record in the manifest and drops every stage that
    /// depends on this one.
    pub fn commit(self, stage: Stage) -> Result<()> {
        let mut m = Manifest::load(&self.output_dir)?;
        m.stages.retain(|name, _| Stage::parse(name).is_some_and(|s| s <= stage));
        m.stages.insert(stage.name().to_string(), self.record);
        m.save(&self.output_dir)
    }
}
