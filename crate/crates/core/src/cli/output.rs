use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{CliError, Result};

/// Output directory that refuses to clobber files unless forced.
pub struct OutDir {
    dir: PathBuf,
    force: bool,
    written: Vec<String>,
}

impl OutDir {
    /// Fails up front if any of `names` (plus the manifest) already exists.
    pub fn claim(dir: PathBuf, force: bool, names: &[&str]) -> Result<Self> {
        if !force {
            for name in names.iter().chain(&["manifest.json"]) {
                let path = dir.join(name);
                if path.exists() {
                    return Err(CliError::Exists(path));
                }
            }
        }
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(OutDir { dir, force, written: Vec::new() })
    }

    /// Path for `name`, recorded as an output; the caller writes it.
    pub fn path(&mut self, name: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        if !self.force && path.exists() {
            return Err(CliError::Exists(path));
        }
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let path = self.path(name)?;
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

impl InputFile {
    pub fn read(path: &Path) -> Result<Self> {
        let data = fs::read(path).map_err(|e| CliError::io(path, e))?;
        let digest = Sha256::digest(&data);
        Ok(InputFile {
            path: path.display().to_string(),
            bytes: data.len() as u64,
            sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
        })
    }
}

/// Everything needed to repeat a run with the same binary.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub threads: usize,
    pub config: Value,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
}
