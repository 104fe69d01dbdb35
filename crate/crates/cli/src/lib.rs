//! Library side of the `dci-lab` command-line tool: configuration, presets,
//! the four commands, and the run manifest written next to their outputs.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod presets;

use std::path::PathBuf;

pub use commands::{cmd_analyze, cmd_grid, cmd_score, cmd_simulate};
pub use config::Config;
pub use manifest::{Fingerprint, RunManifest};

pub type Result<T, E = CliError> = std::result::Result<T, E>;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] dci_core::Error),

    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(e) if e.is_config_error() => EXIT_CONFIG,
            _ => EXIT_DATA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Score,
    Grid,
    Simulate,
    Analyze,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Score => "score",
            Command::Grid => "grid",
            Command::Simulate => "simulate",
            Command::Analyze => "analyze",
        }
    }
}

/// A fully resolved command line.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: Config,
    pub out: PathBuf,
    /// Worker threads; `None` lets the pool pick.
    pub threads: Option<usize>,
}

/// Runs the command on a dedicated thread pool and writes its manifest.
pub fn execute(inv: &Invocation) -> Result<RunManifest> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(inv.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    pool.install(|| {
        let manifest = match inv.command {
            Command::Score => cmd_score(&inv.config, &inv.out),
            Command::Grid => cmd_grid(&inv.config, &inv.out),
            Command::Simulate => cmd_simulate(&inv.config, &inv.out),
            Command::Analyze => cmd_analyze(&inv.config, &inv.out),
        }?;
        manifest.write(&inv.out)?;
        Ok(manifest)
    })
}

/// Thread count from `--threads`, falling back to the `DCI_LAB_THREADS`
/// value `env`.
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>> {
    let n = match (flag, env) {
        (Some(n), _) => n,
        (None, Some(v)) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("DCI_LAB_THREADS must be a positive integer, got `{v}`")))?,
        (None, None) => return Ok(None),
    };
    if n == 0 {
        return Err(CliError::Config("thread count must be at least 1".into()));
    }
    Ok(Some(n))
}
