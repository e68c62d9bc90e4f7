//! The `mechnet` command line: every verb reads one TOML config, applies flag
//! overrides, runs, and leaves a `manifest.json` plus `config.toml` next to
//! its outputs so the run can be repeated exactly.

pub mod config;
mod verbs;

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;

pub use config::Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verb {
    /// One graph from `sim.theta` (or `sim.scenario`).
    Simulate,
    /// Training and validation sets drawn from the prior.
    MakeDataset,
    /// Fit the posterior network; `--input` reuses a `make-dataset` directory.
    Train,
    /// Posterior medians and credible intervals for an edge list.
    Infer,
    /// Simulation-based coverage of a checkpoint.
    Coverage,
    /// Rejection ABC for an edge list.
    Abc,
    /// Posterior predictive check for an edge list.
    Ppc,
    /// Summary statistics of an edge list.
    Summaries,
}

#[derive(Debug, Parser)]
#[command(
    name = "mechnet",
    version,
    about = "Simulation-based inference for mixture-of-mechanisms network models"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub verb: Verb,
    /// TOML config with [sim], [model], [train] and [validate] sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Edge list (infer, abc, ppc, summaries) or dataset directory (train).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// The verb's main count: graphs, replications, draws or pool size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Saved pool from an earlier `abc` run.
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// Override any config leaf, e.g. `--set train.lr=1e-3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("numeric: {0}")]
    Numeric(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Other(_) => 1,
        }
    }
}

impl From<mechnet::Error> for CliError {
    fn from(e: mechnet::Error) -> Self {
        use mechnet::Error as E;
        let msg = e.to_string();
        match e {
            E::Config(_) => CliError::Config(msg),
            E::Io { .. } | E::Parse { .. } | E::Serde(_) => CliError::Io(msg),
            E::NonFinite(_) => CliError::Numeric(msg),
            _ => CliError::Other(msg),
        }
    }
}

pub(crate) fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Folds the dedicated flags into the override list, `--set` last so it wins.
pub fn resolve(cli: &Cli) -> Result<Config, CliError> {
    let mut overrides = Vec::new();
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(n) = cli.n {
        let key = match cli.verb {
            Verb::Simulate => "sim.final_nodes",
            Verb::MakeDataset | Verb::Train => "train.n_train",
            Verb::Infer => "validate.n_draws",
            Verb::Coverage => "validate.n_rep",
            Verb::Abc => "validate.abc_pool",
            Verb::Ppc => "validate.n_pp",
            Verb::Summaries => return Err(CliError::Config("summaries takes no --n".into())),
        };
        overrides.push(format!("{key}={n}"));
    }
    overrides.extend(cli.set.iter().cloned());
    Config::load(cli.config.as_deref(), &overrides)
}

#[derive(Serialize)]
struct Manifest<'a> {
    verb: Verb,
    seed: u64,
    input: Option<&'a Path>,
    checkpoint: Option<&'a Path>,
    pool: Option<&'a Path>,
    outputs: Vec<String>,
    config: &'a Config,
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve(cli)?;
    std::fs::create_dir_all(&cli.out).map_err(|e| io_err(&cli.out, e))?;
    let outputs = verbs::dispatch(cli, &cfg)?;
    let manifest = Manifest {
        verb: cli.verb,
        seed: cfg.seed,
        input: cli.input.as_deref(),
        checkpoint: cli.checkpoint.as_deref(),
        pool: cli.pool.as_deref(),
        outputs,
        config: &cfg,
    };
    let path = cli.out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| io_err(&path, e))?;
    std::fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
    let path = cli.out.join("config.toml");
    std::fs::write(&path, cfg.to_toml()).map_err(|e| io_err(&path, e))?;
    Ok(())
}
