use std::io::Read;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::{CliError, Result};

/// Identifies the dataset a run used: encoded shape plus a hash of the
/// input files' bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    pub rows: usize,
    pub columns: usize,
    pub sha256: String,
}

impl Fingerprint {
    pub fn of_files(paths: &[&Path], rows: usize, columns: usize) -> Result<Fingerprint> {
        let mut hasher = Sha256::new();
        for path in paths {
            let mut bytes = Vec::new();
            std::fs::File::open(path)
                .and_then(|mut f| f.read_to_end(&mut bytes))
                .map_err(|source| dci_core::Error::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
            // length prefix keeps file boundaries part of the digest
            hasher.update((bytes.len() as u64).to_le_bytes());
            hasher.update(&bytes);
        }
        let sha256 = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        Ok(Fingerprint { rows, columns, sha256 })
    }
}

/// Record of one invocation. Holds no timestamps or absolute output paths,
/// so equal inputs give a byte-identical manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub config: Config,
    pub dataset: Fingerprint,
    /// `(name, file name inside the output directory)`
    pub outputs: Vec<(String, String)>,
}

pub const MANIFEST_FILE: &str = "manifest.txt";

impl RunManifest {
    pub fn new(command: &str, config: &Config, seed: u64, dataset: Fingerprint) -> Self {
        RunManifest {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config: config.clone(),
            dataset,
            outputs: Vec::new(),
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "tool = dci-lab {}\ncommand = {}\nseed = {}\ndataset.rows = {}\ndataset.columns = {}\ndataset.sha256 = {}\n",
            self.tool_version, self.command, self.seed, self.dataset.rows, self.dataset.columns, self.dataset.sha256
        );
        for (k, v) in self.config.entries() {
            out.push_str(&format!("config.{k} = {v}\n"));
        }
        for (name, file) in &self.outputs {
            out.push_str(&format!("output.{name} = {file}\n"));
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        write_output(dir, MANIFEST_FILE, &self.render())
    }
}

pub(crate) fn write_output(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::create_dir_all(dir)
        .and_then(|()| std::fs::write(&path, contents))
        .map_err(|source| CliError::Output {
            path: path.clone(),
            source,
        })?;
    Ok(path)
}
