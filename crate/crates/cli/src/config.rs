//! The run configuration: one TOML file with `sim`, `model`, `train` and
//! `validate` sections, plus a top-level master `seed`.

use std::path::Path;

use mechnet::generator::{Prior, SimConfig, Theta};
use mechnet::model::Architecture;
use mechnet::pipeline::RunConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub sim: SimSection,
    pub model: Architecture,
    pub train: TrainSection,
    pub validate: ValidateSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub seed_nodes: usize,
    pub final_nodes: usize,
    pub npa_epsilon: f64,
    pub max_mechanism_retries: usize,
    pub prior: Prior,
    /// Parameters for `simulate`; a preset scenario (1-3) when `theta` is absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Theta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub n_train: usize,
    pub n_val: usize,
    pub lr: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub val_splits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    pub n_rep: usize,
    pub gammas: Vec<f64>,
    pub n_draws: usize,
    /// Credible level (percent) of the `infer` table.
    pub interval: f64,
    pub n_pp: usize,
    pub abc_pool: usize,
    pub accept_fraction: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        let s = RunConfig::default().sim;
        SimSection {
            seed_nodes: s.seed_nodes,
            final_nodes: s.final_nodes,
            npa_epsilon: s.npa_epsilon,
            max_mechanism_retries: s.max_mechanism_retries,
            prior: Prior::default(),
            theta: None,
            scenario: None,
        }
    }
}

impl Default for TrainSection {
    fn default() -> Self {
        let r = RunConfig::default();
        TrainSection {
            n_train: r.n_train,
            n_val: r.n_val,
            lr: r.lr,
            max_epochs: r.max_epochs,
            patience: r.patience,
            batch_size: r.batch_size,
            val_splits: r.val_splits,
        }
    }
}

impl Default for ValidateSection {
    fn default() -> Self {
        ValidateSection {
            n_rep: 200,
            gammas: mechnet::validation::default_gamma_grid(),
            n_draws: 1000,
            interval: 95.0,
            n_pp: 1000,
            abc_pool: 100_000,
            accept_fraction: 0.002,
        }
    }
}

impl Config {
    /// Reads `path` (or starts from defaults), applies `key.path=value`
    /// overrides, and validates the result.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Config, CliError> {
        let mut table: toml::Table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                text.parse()
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        let cfg: Config = table
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.run_config().validate()?;
        let v = &self.validate;
        if v.n_draws == 0
            || v.gammas.iter().any(|g| !(*g > 0.0 && *g < 100.0))
            || !(v.interval > 0.0 && v.interval < 100.0)
        {
            return Err(CliError::Config(
                "validate: n_draws must be positive and levels strictly between 0 and 100".into(),
            ));
        }
        if !(v.accept_fraction > 0.0 && v.accept_fraction <= 1.0) {
            return Err(CliError::Config(
                "validate.accept_fraction must lie in (0, 1]".into(),
            ));
        }
        if let Some(t) = &self.sim.theta {
            t.validate()
                .map_err(|e| CliError::Config(format!("sim.theta: {e}")))?;
        }
        if let Some(s) = self.sim.scenario {
            Theta::scenario(s)
                .ok_or_else(|| CliError::Config(format!("sim.scenario {s} is not 1, 2 or 3")))?;
        }
        Ok(())
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            seed_nodes: self.sim.seed_nodes,
            final_nodes: self.sim.final_nodes,
            npa_epsilon: self.sim.npa_epsilon,
            max_mechanism_retries: self.sim.max_mechanism_retries,
        }
    }

    pub fn run_config(&self) -> RunConfig {
        let t = &self.train;
        RunConfig {
            n_train: t.n_train,
            n_val: t.n_val,
            sim: self.sim_config(),
            prior: self.sim.prior,
            arch: self.model,
            lr: t.lr,
            max_epochs: t.max_epochs,
            patience: t.patience,
            batch_size: t.batch_size,
            master_seed: self.seed,
            val_splits: t.val_splits,
        }
    }

    /// The theta `simulate` uses: explicit `sim.theta`, else `sim.scenario`.
    pub fn simulation_theta(&self) -> Result<Theta, CliError> {
        match (self.sim.theta, self.sim.scenario) {
            (Some(t), _) => Ok(t),
            (None, Some(s)) => {
                Theta::scenario(s).ok_or_else(|| CliError::Config(format!("unknown scenario {s}")))
            }
            (None, None) => Err(CliError::Config(
                "simulate needs sim.theta or sim.scenario".into(),
            )),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// `a.b.c=value`, where `value` is read as a TOML literal when it parses as
/// one and as a bare string otherwise.
fn apply_override(table: &mut toml::Table, ov: &str) -> Result<(), CliError> {
    let (key, raw) = ov
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {ov:?} is not key=value")))?;
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("override {key}: {part} is not a section")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
