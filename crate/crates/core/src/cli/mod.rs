//! The `weightlab` command line: manifest ingestion, suite orchestration and
//! report emission. The binary is a thin clap front end over [`execute`].

pub mod config;
mod report;
mod run;

use std::path::{Path, PathBuf};

pub use config::{load, parse, Config, Instance, Model, CHECK_NAMES, SCHEMA_VERSION};
pub use run::{run_constants, run_sweep, run_verify, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("ingestion error: {0}")]
    Ingest(String),
    #[error(transparent)]
    Compute(#[from] crate::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> u8 {
        2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Constants,
    Verify { probe_epsilon: bool },
    Sweep,
}

/// Loads `config`, runs `command` on a pool of `jobs` threads (all cores
/// when `None`) and writes the reports into `out`.
pub fn execute(
    command: Command,
    config: &Path,
    out: &Path,
    jobs: Option<usize>,
    seed: Option<u64>,
) -> Result<Outcome, CliError> {
    let cfg = load(config, seed)?;
    std::fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        pool = pool.num_threads(n.max(1));
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    pool.install(|| match command {
        Command::Constants => run_constants(&cfg, out),
        Command::Verify { probe_epsilon } => run_verify(&cfg, out, probe_epsilon),
        Command::Sweep => run_sweep(&cfg, out),
    })
}
