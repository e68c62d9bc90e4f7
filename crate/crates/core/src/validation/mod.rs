//! Coverage diagnostics, the rejection-ABC baseline, and posterior predictive checks.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{grow_network, Prior, SimConfig, Theta, PARAM_NAMES};
use crate::graph::Graph;
use crate::model::ModelWeights;
use crate::pipeline::{credible_interval_sorted, quantile_sorted, sample_posterior};
use crate::rng::{stream, Domain};
use crate::summaries::{
    compute_summaries, normalize_pool, SummaryVector, PPC_STATS, SUMMARY_NAMES,
};

/// Nominal levels 5, 10, ..., 95 (percent).
pub fn default_gamma_grid() -> Vec<f64> {
    (1..=19).map(|i| 5.0 * i as f64).collect()
}

/// Anything that can produce approximate posterior draws for an observed graph.
pub trait PosteriorSampler {
    fn sample(&self, g: &Graph, n: usize, rng: &mut dyn RngCore) -> Result<Vec<Theta>>;
}

impl PosteriorSampler for ModelWeights {
    fn sample(&self, g: &Graph, n: usize, rng: &mut dyn RngCore) -> Result<Vec<Theta>> {
        sample_posterior(self, g, n, rng)
    }
}

/// Ignores the graph and returns prior draws: exactly calibrated by construction.
#[derive(Debug, Clone, Copy, Default)]
pub struct PriorSampler(pub Prior);

impl PosteriorSampler for PriorSampler {
    fn sample(&self, _g: &Graph, n: usize, rng: &mut dyn RngCore) -> Result<Vec<Theta>> {
        Ok((0..n).map(|_| self.0.sample(rng)).collect())
    }
}

/// Credible intervals for all 8 marginals at each requested level.
pub trait IntervalOracle {
    fn intervals(
        &mut self,
        g: &Graph,
        gammas: &[f64],
        rng: &mut dyn RngCore,
    ) -> Result<Vec<[(f64, f64); 8]>>;
}

/// Equal-tailed intervals from `n_draws` posterior samples.
pub struct FromDraws<'a, S: PosteriorSampler + ?Sized> {
    pub sampler: &'a S,
    pub n_draws: usize,
}

impl<S: PosteriorSampler + ?Sized> IntervalOracle for FromDraws<'_, S> {
    fn intervals(
        &mut self,
        g: &Graph,
        gammas: &[f64],
        rng: &mut dyn RngCore,
    ) -> Result<Vec<[(f64, f64); 8]>> {
        let draws = self.sampler.sample(g, self.n_draws, rng)?;
        if draws.is_empty() {
            return Err(Error::Contract(
                "posterior sampler returned no draws".into(),
            ));
        }
        let cols: Vec<Vec<f64>> = (0..8)
            .map(|p| {
                let mut c: Vec<f64> = draws.iter().map(|t| t.to_array()[p]).collect();
                c.sort_by(f64::total_cmp);
                c
            })
            .collect();
        Ok(gammas
            .iter()
            .map(|&gm| std::array::from_fn(|p| credible_interval_sorted(&cols[p], gm)))
            .collect())
    }
}

/// Empirical coverage per nominal level and marginal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub gammas: Vec<f64>,
    pub n_rep: usize,
    /// `hits[g][p]`: replications whose true parameter `p` fell in the level-`g` interval.
    pub hits: Vec<[usize; 8]>,
}

impl CoverageReport {
    pub fn coverage(&self, gamma_index: usize, param: usize) -> f64 {
        self.hits[gamma_index][param] as f64 / self.n_rep as f64
    }

    pub fn gamma_index(&self, gamma: f64) -> Option<usize> {
        self.gammas.iter().position(|&g| (g - gamma).abs() < 1e-9)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("parameter,gamma,coverage,n_rep\n");
        for p in 0..8 {
            for (gi, g) in self.gammas.iter().enumerate() {
                s.push_str(&format!(
                    "{},{},{},{}\n",
                    PARAM_NAMES[p],
                    g,
                    self.coverage(gi, p),
                    self.n_rep
                ));
            }
        }
        s
    }
}

/// Simulation-based calibration with the trained model's posterior draws.
pub fn sbc_coverage(
    weights: &ModelWeights,
    prior: &Prior,
    sim: &SimConfig,
    n_rep: usize,
    gammas: &[f64],
    n_draws: usize,
    master_seed: u64,
) -> Result<CoverageReport> {
    let mut oracle = FromDraws {
        sampler: weights,
        n_draws,
    };
    sbc_coverage_with(&mut oracle, prior, sim, n_rep, gammas, master_seed)
}

/// Replication `i` draws `theta ~ prior`, grows a graph, and asks `oracle`
/// for intervals, all on coverage stream `i`.
pub fn sbc_coverage_with<O: IntervalOracle + ?Sized>(
    oracle: &mut O,
    prior: &Prior,
    sim: &SimConfig,
    n_rep: usize,
    gammas: &[f64],
    master_seed: u64,
) -> Result<CoverageReport> {
    if n_rep == 0 || gammas.iter().any(|g| !(*g > 0.0 && *g < 100.0)) {
        return Err(Error::Config(
            "coverage needs n_rep > 0 and levels strictly between 0 and 100".into(),
        ));
    }
    let mut hits = vec![[0usize; 8]; gammas.len()];
    for i in 0..n_rep {
        let mut rng = stream(master_seed, Domain::Coverage, i as u64);
        let truth = prior.sample(&mut rng).to_array();
        let g = grow_network(&Theta::from_array(truth), sim, &mut rng).graph;
        let iv = oracle.intervals(&g, gammas, &mut rng)?;
        for (row, ints) in hits.iter_mut().zip(&iv) {
            for p in 0..8 {
                let (lo, hi) = ints[p];
                if lo <= truth[p] && truth[p] <= hi {
                    row[p] += 1;
                }
            }
        }
    }
    Ok(CoverageReport {
        gammas: gammas.to_vec(),
        n_rep,
        hits,
    })
}

/// A reference table of prior draws and their summaries.
pub fn build_abc_pool(
    n: usize,
    prior: &Prior,
    sim: &SimConfig,
    master_seed: u64,
) -> Vec<(Theta, SummaryVector)> {
    (0..n as u64)
        .map(|i| {
            let mut rng = stream(master_seed, Domain::AbcPool, i);
            let theta = prior.sample(&mut rng);
            let g = grow_network(&theta, sim, &mut rng).graph;
            (theta, compute_summaries(&g))
        })
        .collect()
}

/// Indices of the `ceil(f * |pool|)` pool members nearest to `obs` after
/// z-scoring by pool statistics. Ties go to the lower index.
pub fn abc_accept_indices(
    obs: &[f64],
    pool: &[Vec<f64>],
    accept_fraction: f64,
) -> Result<Vec<usize>> {
    if pool.is_empty() {
        return Err(Error::Contract("ABC pool is empty".into()));
    }
    if !(accept_fraction > 0.0 && accept_fraction <= 1.0) {
        return Err(Error::Config(format!(
            "accept_fraction {accept_fraction} not in (0, 1]"
        )));
    }
    let norm = normalize_pool(pool);
    let z = norm.transform(obs);
    let mut dist: Vec<(f64, usize)> = norm
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            (
                r.iter().zip(&z).map(|(a, b)| (a - b).powi(2)).sum::<f64>(),
                i,
            )
        })
        .collect();
    // fp headroom: ceil(0.002 * 100000) must be 200, not 201
    let k = ((accept_fraction * pool.len() as f64) - 1e-9)
        .ceil()
        .max(1.0) as usize;
    let k = k.min(pool.len());
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(dist[..k].iter().map(|&(_, i)| i).collect())
}

pub fn rejection_abc(
    obs: &Graph,
    pool: &[(Theta, SummaryVector)],
    accept_fraction: f64,
) -> Result<Vec<Theta>> {
    let rows: Vec<Vec<f64>> = pool.iter().map(|(_, s)| s.to_array().to_vec()).collect();
    let idx = abc_accept_indices(&compute_summaries(obs).to_array(), &rows, accept_fraction)?;
    Ok(idx.into_iter().map(|i| pool[i].0).collect())
}

/// Observed summaries plus the posterior predictive sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpcResult {
    pub observed: SummaryVector,
    pub thetas: Vec<Theta>,
    pub samples: Vec<SummaryVector>,
}

impl PpcResult {
    /// Central `gamma_pct`% predictive interval of statistic `stat`.
    pub fn interval(&self, stat: usize, gamma_pct: f64) -> Option<(f64, f64)> {
        if self.samples.is_empty() {
            return None;
        }
        let mut col: Vec<f64> = self.samples.iter().map(|s| s.to_array()[stat]).collect();
        col.sort_by(f64::total_cmp);
        Some(credible_interval_sorted(&col, gamma_pct))
    }

    /// Whether each plotted statistic's observed value lies in its central interval.
    pub fn inside(&self, gamma_pct: f64) -> Vec<(usize, bool)> {
        let obs = self.observed.to_array();
        PPC_STATS
            .iter()
            .map(|&s| {
                let hit = self
                    .interval(s, gamma_pct)
                    .is_some_and(|(lo, hi)| lo <= obs[s] && obs[s] <= hi);
                (s, hit)
            })
            .collect()
    }

    pub fn predictive_median(&self, stat: usize) -> Option<f64> {
        let mut col: Vec<f64> = self.samples.iter().map(|s| s.to_array()[stat]).collect();
        col.sort_by(f64::total_cmp);
        (!col.is_empty()).then(|| quantile_sorted(&col, 0.5))
    }

    /// Long format: `statistic,sample,value`, with `observed` as the sample label of the data.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("statistic,sample,value\n");
        let obs = self.observed.to_array();
        for &st in &PPC_STATS {
            s.push_str(&format!("{},observed,{}\n", SUMMARY_NAMES[st], obs[st]));
            for (j, v) in self.samples.iter().enumerate() {
                s.push_str(&format!(
                    "{},{},{}\n",
                    SUMMARY_NAMES[st],
                    j,
                    v.to_array()[st]
                ));
            }
        }
        s
    }
}

/// Simulates `n_pp` networks from posterior draws, each with as many nodes as `obs`.
pub fn ppc_run<S: PosteriorSampler + ?Sized>(
    sampler: &S,
    obs: &Graph,
    n_pp: usize,
    sim: &SimConfig,
    master_seed: u64,
) -> Result<PpcResult> {
    let sim = sim.with_final_nodes(obs.node_count());
    sim.validate()?;
    let thetas = if n_pp == 0 {
        Vec::new()
    } else {
        sampler.sample(obs, n_pp, &mut stream(master_seed, Domain::Posterior, 0))?
    };
    let samples = thetas
        .iter()
        .enumerate()
        .map(|(j, t)| {
            compute_summaries(
                &grow_network(
                    t,
                    &sim,
                    &mut stream(master_seed, Domain::Predictive, j as u64),
                )
                .graph,
            )
        })
        .collect();
    Ok(PpcResult {
        observed: compute_summaries(obs),
        thetas,
        samples,
    })
}
