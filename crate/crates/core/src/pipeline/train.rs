use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::autodiff::AdamState;
use crate::error::{Error, Result};
use crate::generator::{DatasetEntry, Prior, SimConfig, Theta};
use crate::graph::Graph;
use crate::model::{Architecture, GraphBatch, ModelWeights};
use crate::rng::{stream, Domain};

const EVAL_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_train: usize,
    pub n_val: usize,
    pub sim: SimConfig,
    pub prior: Prior,
    pub arch: Architecture,
    pub lr: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub master_seed: u64,
    pub val_splits: usize,
}

impl Default for RunConfig {
    /// Desk-scale settings: 20k/5k simulations of 100-node networks.
    fn default() -> Self {
        RunConfig {
            n_train: 20_000,
            n_val: 5_000,
            sim: SimConfig::default().with_final_nodes(100),
            prior: Prior::default(),
            arch: Architecture::default(),
            lr: 0.0005,
            max_epochs: 100,
            patience: 10,
            batch_size: 128,
            master_seed: 0,
            val_splits: 250,
        }
    }
}

impl RunConfig {
    /// Full-size run: 500k/250k simulations of 500-node networks.
    pub fn full_scale() -> Self {
        RunConfig {
            n_train: 500_000,
            n_val: 250_000,
            sim: SimConfig::default(),
            ..RunConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.prior.validate()?;
        self.arch.validate()?;
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.batch_size == 0
            || self.max_epochs == 0
            || self.patience == 0
            || self.val_splits == 0
        {
            return bad("batch_size, max_epochs, patience and val_splits must be positive");
        }
        if self.patience > self.max_epochs {
            return bad("patience must not exceed max_epochs");
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return bad("lr must be a nonnegative number");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_epe: f64,
    pub val_epe: f64,
    pub val_split_min: f64,
    pub val_split_max: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingLog {
    pub initial_val_epe: f64,
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
}

impl TrainingLog {
    pub const HEADER: &'static str =
        "epoch,train_epe,val_epe,val_split_min,val_split_max,wall_time";

    pub fn best_val_epe(&self) -> f64 {
        self.epochs
            .iter()
            .find(|e| e.epoch == self.best_epoch)
            .map_or(f64::INFINITY, |e| e.val_epe)
    }

    /// One CSV row per epoch. Wall time is excluded when `with_time` is false,
    /// which makes the table reproducible byte for byte.
    pub fn to_csv(&self, with_time: bool) -> String {
        let mut s = String::from(Self::HEADER);
        s.push('\n');
        for e in &self.epochs {
            let t = if with_time {
                format!("{:.3}", e.wall_time)
            } else {
                "NA".into()
            };
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.epoch, e.train_epe, e.val_epe, e.val_split_min, e.val_split_max, t
            ));
        }
        s
    }
}

/// Validation EPE overall and the min/max across `splits` contiguous sections.
pub fn evaluate(
    weights: &ModelWeights,
    data: &[DatasetEntry],
    splits: usize,
) -> Result<(f64, f64, f64)> {
    let mut nll = Vec::with_capacity(data.len());
    for chunk in data.chunks(EVAL_CHUNK) {
        let graphs: Vec<&Graph> = chunk.iter().map(|e| &e.graph).collect();
        let thetas: Vec<Theta> = chunk.iter().map(|e| e.theta).collect();
        nll.extend(weights.per_graph_nll(&GraphBatch::new(&graphs)?, &thetas)?);
    }
    if nll.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("validation loss".into()));
    }
    let mean = nll.iter().sum::<f64>() / nll.len() as f64;
    let splits = splits.clamp(1, nll.len());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in 0..splits {
        let part = &nll[s * nll.len() / splits..(s + 1) * nll.len() / splits];
        let m = part.iter().sum::<f64>() / part.len() as f64;
        lo = lo.min(m);
        hi = hi.max(m);
    }
    Ok((mean, lo, hi))
}

pub fn train(
    config: &RunConfig,
    train_set: &[DatasetEntry],
    val_set: &[DatasetEntry],
) -> Result<(ModelWeights, TrainingLog)> {
    train_with(config, train_set, val_set, |_| {})
}

/// Adam on minibatch EPE with early stopping on validation EPE; the
/// best-validation weights are returned. `on_epoch` sees every log row.
pub fn train_with<F>(
    config: &RunConfig,
    train_set: &[DatasetEntry],
    val_set: &[DatasetEntry],
    mut on_epoch: F,
) -> Result<(ModelWeights, TrainingLog)>
where
    F: FnMut(&EpochRecord),
{
    config.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::Contract(
            "training needs nonempty train and validation sets".into(),
        ));
    }
    let start = Instant::now();
    let mut weights = ModelWeights::init(config.arch, config.master_seed)?;
    weights.zero_grad();
    let mut adam = AdamState::new(config.lr);
    let mut log = TrainingLog {
        initial_val_epe: evaluate(&weights, val_set, config.val_splits)?.0,
        ..TrainingLog::default()
    };
    let mut best = (f64::INFINITY, weights.clone());
    let mut stale = 0;
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut stream(
            config.master_seed,
            Domain::Shuffle,
            epoch as u64,
        ));
        let (mut total, mut count) = (0.0, 0usize);
        for (bi, idx) in order.chunks(config.batch_size).enumerate() {
            let graphs: Vec<&Graph> = idx.iter().map(|&i| &train_set[i].graph).collect();
            let thetas: Vec<Theta> = idx.iter().map(|&i| train_set[i].theta).collect();
            let batch = GraphBatch::new(&graphs)?;
            let loss = weights
                .loss_and_grad(&batch, &thetas)
                .map_err(|e| match e {
                    Error::NonFinite(what) => Error::NonFinite(format!(
                        "{what} at epoch {epoch}, batch {bi} (last epoch mean {:.4})",
                        if count > 0 {
                            total / count as f64
                        } else {
                            f64::NAN
                        }
                    )),
                    other => other,
                })?;
            adam.step(&mut weights.params)?;
            total += loss * idx.len() as f64;
            count += idx.len();
        }
        let (val, lo, hi) = evaluate(&weights, val_set, config.val_splits)?;
        let rec = EpochRecord {
            epoch,
            train_epe: total / count as f64,
            val_epe: val,
            val_split_min: lo,
            val_split_max: hi,
            wall_time: start.elapsed().as_secs_f64(),
        };
        on_epoch(&rec);
        log.epochs.push(rec);
        if val < best.0 {
            best = (val, weights.clone());
            log.best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                break;
            }
        }
    }
    let mut out = best.1;
    out.params.iter_mut().for_each(|t| t.grad = None);
    Ok((out, log))
}
