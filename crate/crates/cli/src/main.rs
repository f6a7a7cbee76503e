//! `risk-saa`: runs one experiment command from a JSON config and writes
//! `report.json` plus CSV tables into the output directory.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 refusal (preconditions of the requested analysis do not hold).

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use risk_saa_core::rng::RNG_ID;
use risk_saa_core::ErrorKind;

use config::{Command, ResolvedConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] risk_saa_core::Error),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Io(_) => "config",
            CliError::Core(e) => match e.kind() {
                ErrorKind::Config => "config",
                ErrorKind::Numerical => "numerical",
                ErrorKind::Refusal => "refusal",
            },
        }
    }

    fn exit_code(&self) -> u8 {
        match self.kind() {
            "numerical" => 3,
            "refusal" => 4,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "risk-saa", version, about = "Risk-averse SAA solver and asymptotics harnesses")]
struct Args {
    /// Overrides the `command` field of the config.
    #[arg(value_enum)]
    command: Option<Command>,
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "RISK_SAA_THREADS")]
    threads: Option<usize>,
    /// Overrides `out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut out_dir = args.out.clone();
    let result = execute(&args, &mut out_dir);
    let failure = match result {
        Ok(()) => return ExitCode::SUCCESS,
        Err(e) => e,
    };
    eprintln!(
        "{}",
        json!({ "error": failure.kind(), "exit_code": failure.exit_code(), "message": failure.to_string() })
    );
    if let Some(dir) = out_dir {
        let report = json!({
            "tool": "risk-saa",
            "version": env!("CARGO_PKG_VERSION"),
            "status": "error",
            "error": { "kind": failure.kind(), "message": failure.to_string() },
        });
        // best effort; the error line above is authoritative
        let _ = write_json(&dir.join("report.json"), &report);
    }
    ExitCode::from(failure.exit_code())
}

fn execute(args: &Args, out_dir: &mut Option<PathBuf>) -> Result<(), CliError> {
    let raw = config::load(&args.config)?;
    let base = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
    if out_dir.is_none() {
        *out_dir = Some(raw.out_dir.as_ref().map(|d| base.join(d)).unwrap_or_else(|| PathBuf::from(".")));
    }
    let command = args
        .command
        .or(raw.command)
        .ok_or_else(|| CliError::Config("no command given".into()))?;
    let master_seed = args.seed.or(raw.master_seed);
    if command.is_stochastic() && master_seed.is_none() {
        return Err(CliError::Config(format!("{command:?} needs a master_seed (config or --seed)")));
    }
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let resolved = ResolvedConfig {
        command,
        problem: config::resolve_problem(raw.problem, &base)?,
        params: commands::normalize_params(command, serde_json::Value::Object(raw.params))?,
        master_seed,
    };
    let output = commands::run(&resolved)?;

    let dir = out_dir.as_ref().expect("set above");
    std::fs::create_dir_all(dir)?;
    let report = json!({
        "tool": "risk-saa",
        "version": env!("CARGO_PKG_VERSION"),
        "status": "ok",
        "rng": RNG_ID,
        "config_hash": resolved.hash(),
        "config": resolved,
        "result": output.result,
    });
    write_json(&dir.join("report.json"), &report)?;
    for table in &output.tables {
        let mut w = csv_writer(&dir.join(table.name))?;
        w.write_record(&table.header).map_err(csv_err)?;
        for row in &table.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush()?;
    }
    Ok(())
}

fn write_json(path: &Path, v: &serde_json::Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(v).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(csv_err)
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}
