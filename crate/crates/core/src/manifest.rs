//! Run manifests: what was run, with which seeds, and what it produced.
//!
//! Wall-clock timings live in a sibling `timings.json` so that repeating a
//! run reproduces the manifest byte for byte.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::io::sha256_file;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

impl FileRecord {
    pub fn of(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Ok(Self { path: path.to_path_buf(), sha256: sha256_file(path)?, bytes: std::fs::metadata(path)?.len() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config: RunConfig,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config: &RunConfig) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.into(),
            config: config.clone(),
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn seed(&mut self, name: &str, value: u64) -> &mut Self {
        self.seeds.insert(name.to_string(), value);
        self
    }

    pub fn input(&mut self, path: impl AsRef<Path>) -> Result<&mut Self> {
        self.inputs.push(FileRecord::of(path)?);
        Ok(self)
    }

    pub fn output(&mut self, path: impl AsRef<Path>) -> Result<&mut Self> {
        self.outputs.push(FileRecord::of(path)?);
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialises");
        s.push('\n');
        s
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        serde_json::from_str(&std::fs::read_to_string(path)?).map_err(|e| Error::Format(e.to_string()))
    }

    /// Paths whose current contents no longer match the recorded hash.
    pub fn stale_outputs(&self) -> Result<Vec<PathBuf>> {
        let mut stale = Vec::new();
        for rec in &self.outputs {
            if !rec.path.exists() || sha256_file(&rec.path)? != rec.sha256 {
                stale.push(rec.path.clone());
            }
        }
        Ok(stale)
    }
}

/// Named stage durations in seconds.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub stages: BTreeMap<String, f64>,
}

impl Timings {
    pub fn record(&mut self, stage: &str, elapsed: Duration) {
        self.stages.insert(stage.to_string(), elapsed.as_secs_f64());
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).expect("timings serialise") + "\n")?;
        Ok(())
    }
}
