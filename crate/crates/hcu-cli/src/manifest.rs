//! Run manifests: a JSON record of the config snapshot, input digests,
//! per-stage timings, warnings, and tallies. One is written for every run,
//! including failed ones (with the failing stage recorded).

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct StageTiming {
    pub name: String,
    pub millis: u128,
}

#[derive(Debug, Serialize)]
pub struct Failure {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub stages: Vec<StageTiming>,
    pub warnings: Vec<String>,
    pub tallies: BTreeMap<String, u64>,
    pub failure: Option<Failure>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            inputs: Vec::new(),
            stages: Vec::new(),
            warnings: Vec::new(),
            tallies: BTreeMap::new(),
            failure: None,
        }
    }

    /// Runs a stage, recording its wall time; a failing stage is recorded
    /// and its error propagated.
    pub fn stage<T>(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Self) -> anyhow::Result<T>,
    ) -> anyhow::Result<T> {
        let start = Instant::now();
        let result = f(self);
        self.stages.push(StageTiming {
            name: name.to_string(),
            millis: start.elapsed().as_millis(),
        });
        if let Err(e) = &result {
            self.failure = Some(Failure {
                stage: name.to_string(),
                message: format!("{e:#}"),
            });
        }
        result
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    pub fn tally(&mut self, name: &str, count: u64) {
        *self.tallies.entry(name.to_string()).or_insert(0) += count;
    }

    /// Records a streamed SHA-256 digest of an input file.
    pub fn digest_input(&mut self, path: &Path) -> anyhow::Result<()> {
        let mut file = std::fs::File::open(path)?;
        let mut hasher = Sha256::new();
        let mut buf = [0u8; 64 * 1024];
        loop {
            let n = file.read(&mut buf)?;
            if n == 0 {
                break;
            }
            hasher.update(&buf[..n]);
        }
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: format!("{:x}", hasher.finalize()),
        });
        Ok(())
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }
}
