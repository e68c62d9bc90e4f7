//! Dataset generation, training, and posterior summaries.

mod train;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::generator::{grow_network, DatasetEntry, Prior, SimConfig, Theta};
use crate::graph::Graph;
use crate::model::ModelWeights;
use crate::rng::{stream, Domain};

pub use crate::model::{batch_graphs, GraphBatch};
pub use train::{train, train_with, EpochRecord, RunConfig, TrainingLog};

/// `n` prior draws and their simulated graphs. Draw `i` uses its own RNG
/// stream, so any prefix of a larger dataset is reproduced exactly.
pub fn generate_dataset(
    n: usize,
    sim: &SimConfig,
    prior: &Prior,
    master_seed: u64,
    domain: Domain,
) -> Vec<DatasetEntry> {
    (0..n as u64)
        .map(|i| simulate_draw(sim, prior, master_seed, domain, i))
        .collect()
}

pub fn simulate_draw(
    sim: &SimConfig,
    prior: &Prior,
    master_seed: u64,
    domain: Domain,
    index: u64,
) -> DatasetEntry {
    let mut rng = stream(master_seed, domain, index);
    let theta = prior.sample(&mut rng);
    let out = grow_network(&theta, sim, &mut rng);
    DatasetEntry {
        theta,
        graph: out.graph,
        diagnostics: out.diagnostics,
        stream: index,
    }
}

/// Draws from the fitted posterior of `g`.
pub fn sample_posterior<R: Rng + ?Sized>(
    weights: &ModelWeights,
    g: &Graph,
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<Theta>> {
    let q = weights.posterior(g)?;
    Ok((0..n_samples).map(|_| q.sample(rng)).collect())
}

/// Empirical quantile with the midpoint convention: the `i`-th smallest of
/// `n` values (1-based) sits at probability `(i - 0.5) / n`, with linear
/// interpolation in between and clamping outside.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let n = sorted.len();
    let h = n as f64 * p + 0.5;
    if h <= 1.0 {
        return sorted[0];
    }
    if h >= n as f64 {
        return sorted[n - 1];
    }
    let lo = h.floor();
    let frac = h - lo;
    let i = lo as usize - 1;
    sorted[i] + frac * (sorted[i + 1] - sorted[i])
}

/// Equal-tailed `gamma_pct`% interval.
pub fn credible_interval(draws: &[f64], gamma_pct: f64) -> (f64, f64) {
    let mut s = draws.to_vec();
    s.sort_by(f64::total_cmp);
    credible_interval_sorted(&s, gamma_pct)
}

pub fn credible_interval_sorted(sorted: &[f64], gamma_pct: f64) -> (f64, f64) {
    let tail = (1.0 - gamma_pct / 100.0) / 2.0;
    (
        quantile_sorted(sorted, tail),
        quantile_sorted(sorted, 1.0 - tail),
    )
}

/// Median and 95% interval of one marginal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalSummary {
    pub median: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Per-parameter medians and `gamma_pct`% intervals, in [`Theta::to_array`] order.
pub fn summarize_draws(draws: &[Theta], gamma_pct: f64) -> [MarginalSummary; 8] {
    let mut out = [MarginalSummary {
        median: 0.0,
        lo: 0.0,
        hi: 0.0,
    }; 8];
    for (p, slot) in out.iter_mut().enumerate() {
        let mut col: Vec<f64> = draws.iter().map(|t| t.to_array()[p]).collect();
        col.sort_by(f64::total_cmp);
        let (lo, hi) = credible_interval_sorted(&col, gamma_pct);
        *slot = MarginalSummary {
            median: quantile_sorted(&col, 0.5),
            lo,
            hi,
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_draws() {
        assert_eq!(credible_interval(&[2.5; 17], 95.0), (2.5, 2.5));
    }

    #[test]
    fn zero_width_is_median() {
        let d = [5.0, 1.0, 3.0, 2.0, 4.0];
        assert_eq!(credible_interval(&d, 0.0), (3.0, 3.0));
    }

    #[test]
    fn midpoint_grid() {
        let d: Vec<f64> = (0..100).map(|i| i as f64 + 0.5).collect();
        let (lo, hi) = credible_interval(&d, 90.0);
        assert!(
            (lo - 5.0).abs() < 1e-12 && (hi - 95.0).abs() < 1e-12,
            "{lo} {hi}"
        );
    }

    #[test]
    fn dataset_is_reproducible() {
        let sim = SimConfig::default().with_final_nodes(20);
        let a = generate_dataset(5, &sim, &Prior::default(), 3, Domain::Train);
        let b = generate_dataset(5, &sim, &Prior::default(), 3, Domain::Train);
        assert_eq!(a, b);
        assert!(generate_dataset(0, &sim, &Prior::default(), 3, Domain::Train).is_empty());
        assert!(a.iter().all(|e| e.graph.node_count() == 20));
    }
}
