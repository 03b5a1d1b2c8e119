//! Per-run record of inputs, parameters and output digests.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub parameters: serde_json::Value,
    /// Input path as given -> SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    /// Output file name -> SHA-256 of its bytes.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(
        command: &'static str,
        seed: Option<u64>,
        parameters: impl Serialize,
    ) -> Result<Self> {
        Ok(RunManifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            parameters: serde_json::to_value(parameters)?,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        })
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs
            .insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    /// Hashes every listed output in `dir` and writes `manifest.json` there.
    pub fn finish(mut self, dir: &Path, outputs: &[String]) -> Result<()> {
        for name in outputs {
            self.outputs
                .insert(name.clone(), sha256_file(&dir.join(name))?);
        }
        let mut text = serde_json::to_string_pretty(&self)?;
        text.push('\n');
        let path = dir.join("manifest.json");
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}
