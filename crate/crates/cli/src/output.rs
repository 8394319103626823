use std::io::Write;
use std::path::{Path, PathBuf};

use monocone::Error;
use serde::Serialize;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Lib(#[from] Error),
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Lib(Error::Json(e))
    }
}

/// Exit status and a short kind label.
pub fn classify(err: &CliError) -> (i32, &'static str) {
    match err {
        CliError::Read { .. } => (1, "missing-input"),
        CliError::Write { .. } => (1, "io"),
        CliError::Config(_) => (1, "config"),
        CliError::Lib(e) => match e.root() {
            Error::InvalidParameter(_) | Error::BudgetExceeded { .. } => (1, "invalid-parameter"),
            Error::Malformed(_) | Error::Json(_) => (1, "malformed"),
            Error::Io(_) => (1, "io"),
            Error::NonConvergence { .. } => (2, "non-convergence"),
            Error::Integration(_) => (2, "integration"),
            Error::Precondition(_) => (3, "precondition"),
            Error::Stage { .. } => unreachable!("root skips stage labels"),
        },
    }
}

fn stage(err: &CliError) -> Option<&'static str> {
    match err {
        CliError::Lib(Error::Stage { stage, .. }) => Some(stage),
        _ => None,
    }
}

/// One JSON line for stderr.
pub fn reason_line(err: &CliError) -> String {
    let (code, kind) = classify(err);
    let reason = match err {
        CliError::Lib(e) => e.root().to_string(),
        other => other.to_string(),
    };
    serde_json::json!({ "exit": code, "kind": kind, "stage": stage(err), "reason": reason }).to_string()
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// Write through a temporary file in the target directory and rename it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let wrap = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(wrap)?;
    tmp.write_all(bytes).map_err(wrap)?;
    tmp.as_file().sync_all().map_err(wrap)?;
    tmp.persist(path).map_err(|e| wrap(e.error))?;
    Ok(())
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Manifest<'a> {
    pub command: String,
    pub parameters: serde_json::Value,
    pub argv: &'a [String],
    pub seed: u64,
    pub threads: usize,
    pub versions: Versions,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub monocone: &'static str,
    pub cli: &'static str,
}

impl Versions {
    pub fn current() -> Self {
        Versions {
            monocone: monocone::VERSION,
            cli: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// Files produced by a command, written after it succeeds.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(PathBuf, Vec<u8>)>,
    /// Summary printed on stdout.
    pub summary: Option<serde_json::Value>,
}

impl Artifacts {
    pub fn file(mut self, path: &Path, bytes: impl Into<Vec<u8>>) -> Self {
        self.files.push((path.to_path_buf(), bytes.into()));
        self
    }

    pub fn json(self, path: &Path, value: &impl Serialize) -> Result<Self, CliError> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        Ok(self.file(path, text))
    }

    pub fn summary(mut self, value: serde_json::Value) -> Self {
        self.summary = Some(value);
        self
    }
}
