//! `run-manifest.json`: effective configuration, input hashes, tool build
//! and a SHA-256 per output file. Contains nothing time- or host-dependent,
//! so identical runs write identical manifests.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use lsis_core::EventDataset;

use crate::{runtime, Outcome, BUILD_ID};

pub struct Manifest {
    command: &'static str,
    config: Value,
    dataset: Option<Value>,
    inputs: Vec<Value>,
    outputs: Vec<Value>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Manifest {
    pub fn new(command: &'static str, config: Value) -> Self {
        Manifest {
            command,
            config,
            dataset: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn dataset(&mut self, d: &EventDataset) {
        self.dataset = Some(json!({
            "hash": d.content_hash(),
            "pool": d.pool_address().to_string(),
            "events": d.len(),
            "owners": d.owners().len(),
            "min_block": d.min_block(),
            "max_block": d.max_block(),
        }));
    }

    pub fn dataset_hash(&mut self, hash: &str) {
        self.dataset = Some(json!({ "hash": hash }));
    }

    pub fn input_file(&mut self, role: &str, path: &Path) -> Outcome<()> {
        let bytes = fs::read(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(runtime)?;
        self.inputs.push(json!({ "role": role, "sha256": sha256_hex(&bytes) }));
        Ok(())
    }

    /// Writes an output file and records its digest.
    pub fn write(&mut self, dir: &Path, name: &str, contents: String) -> Outcome<()> {
        let path = dir.join(name);
        fs::write(&path, contents.as_bytes())
            .with_context(|| format!("writing {}", path.display()))
            .map_err(runtime)?;
        self.outputs.push(json!({ "file": name, "sha256": sha256_hex(contents.as_bytes()) }));
        println!("{}", path.display());
        Ok(())
    }

    pub fn finish(self, dir: &Path) -> Outcome<()> {
        let doc = json!({
            "tool": "lsis",
            "version": BUILD_ID,
            "command": self.command,
            "config": self.config,
            "dataset": self.dataset,
            "inputs": self.inputs,
            "outputs": self.outputs,
        });
        let path = dir.join("run-manifest.json");
        let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
        text.push('\n');
        fs::write(&path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(runtime)?;
        println!("{}", path.display());
        Ok(())
    }
}
