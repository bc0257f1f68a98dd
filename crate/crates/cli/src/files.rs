//! Reading inputs and writing outputs. Every read failure is reported as
//! [`InvalidInput`] so that it maps to exit code 2.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use zeeman_core::{ChainSpec, Complex64, NetworkSpec, SpinChainSpec};

#[derive(Debug)]
pub struct InvalidInput(pub String);

impl fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    InvalidInput(msg.into()).into()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

/// Any of the three system descriptions, told apart by their keys.
#[derive(Debug, Clone)]
pub enum System {
    Chain(ChainSpec),
    Spin(SpinChainSpec),
    Network(NetworkSpec),
}

impl System {
    pub fn load(path: &Path) -> Result<Self> {
        let value: Value = read_json(path)?;
        let has = |key: &str| value.get(key).is_some();
        let parsed = if has("entries") {
            serde_json::from_value(value).map(System::Network)
        } else if has("anisotropy") {
            serde_json::from_value(value).map(System::Spin)
        } else {
            serde_json::from_value(value).map(System::Chain)
        };
        parsed.map_err(|e| invalid(format!("{}: {e}", path.display())))
    }

    pub fn n_sites(&self) -> usize {
        match self {
            System::Chain(c) => c.n_sites(),
            System::Spin(s) => s.n_sites(),
            System::Network(n) => n.dimension(),
        }
    }
}

/// A probe vector file: `[[re, im], ...]`.
pub fn read_probe(path: &Path) -> Result<Vec<Complex64>> {
    let raw: Vec<[f64; 2]> = read_json(path)?;
    Ok(raw.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
}

/// Collects the paths of everything written so the manifest can list them.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn new(root: &Path) -> Self {
        Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        fs::create_dir_all(&self.root).with_context(|| format!("creating {}", self.root.display()))?;
        let path = self.root.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
