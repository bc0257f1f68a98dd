use std::path::{Path, PathBuf};

use anyhow::Result;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::args::Command;
use crate::files::{read_json, OutDir};

pub const FILE_NAME: &str = "manifest.json";

/// Record of one run, enough to repeat it with `zeeman replay`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Command,
    /// Values derived during the run, such as an inferred field strength.
    #[serde(default)]
    pub resolved: Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub master_seed: Option<u64>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(parameters: &Command, inputs: Vec<PathBuf>, master_seed: Option<u64>) -> Self {
        Self {
            command: parameters.name().to_string(),
            parameters: parameters.clone(),
            resolved: Value::Null,
            inputs,
            outputs: Vec::new(),
            master_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    /// Writes the manifest last, listing everything written before it.
    pub fn finish(mut self, out: &mut OutDir) -> Result<()> {
        self.outputs = out.written().to_vec();
        self.outputs.push(out.root().join(FILE_NAME));
        out.write_json(FILE_NAME, &self)
    }
}
