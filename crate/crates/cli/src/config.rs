use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use risk_saa_core::ProblemFile;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Oce,
    Solve,
    TrueValue,
    Clt,
    Deviation,
    Bounds,
    BracketCheck,
}

impl Command {
    pub fn is_stochastic(self) -> bool {
        matches!(self, Command::Clt | Command::Deviation | Command::BracketCheck)
    }
}

/// `problem` is either a path (relative to the config file) or an inline
/// problem object.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemRef {
    Path(PathBuf),
    Inline(Box<ProblemFile>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemRef>,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

/// Everything a command needs, with files read and defaults filled in.
/// Serialized into every report; running it again reproduces the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemFile>,
    pub params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
}

impl ResolvedConfig {
    /// SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn problem(&self) -> Result<&ProblemFile, CliError> {
        self.problem
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("{:?} needs a problem", self.command)))
    }
}

pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Reads the problem file and any CSV sample it references.
pub fn resolve_problem(problem: Option<ProblemRef>, base_dir: &Path) -> Result<Option<ProblemFile>, CliError> {
    let (mut p, dir) = match problem {
        None => return Ok(None),
        Some(ProblemRef::Inline(p)) => (*p, base_dir.to_path_buf()),
        Some(ProblemRef::Path(rel)) => {
            let path = base_dir.join(rel);
            let p = ProblemFile::load(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (p, dir)
        }
    };
    p.inline_sample(&dir)?;
    Ok(Some(p))
}
