//! Forward simulation of the edgewise mixture-of-mechanisms model.

mod mechanisms;
mod output;
mod theta;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

pub use mechanisms::{
    apply_evolution_event, select_growth_target, EvolutionMechanism, GrowthMechanism,
    InverseDegreeSampler,
};
pub use output::{read_dataset, write_dataset, write_simulation, DatasetEntry, SimulationRecord};
pub use theta::{
    sample_categorical, sample_dirichlet, sample_gamma, sample_poisson, sample_prior,
    GammaParameterization, Prior, Theta, PARAM_NAMES,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Size of the complete seed graph.
    pub seed_nodes: usize,
    pub final_nodes: usize,
    pub npa_epsilon: f64,
    pub max_mechanism_retries: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed_nodes: 4,
            final_nodes: 500,
            npa_epsilon: 1e-4,
            max_mechanism_retries: 20,
        }
    }
}

impl SimConfig {
    pub fn with_final_nodes(self, final_nodes: usize) -> Self {
        SimConfig {
            final_nodes,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seed_nodes < 2 || self.final_nodes < self.seed_nodes {
            return Err(Error::Config(format!(
                "need final_nodes >= seed_nodes >= 2, got {} and {}",
                self.final_nodes, self.seed_nodes
            )));
        }
        if !(self.npa_epsilon > 0.0) || self.max_mechanism_retries == 0 {
            return Err(Error::Config(
                "npa_epsilon and max_mechanism_retries must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Per-mechanism event counts for one simulation, indexed like
/// [`GrowthMechanism::ALL`] and [`EvolutionMechanism::ALL`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub growth_drawn: [u64; 3],
    pub growth_applied: [u64; 3],
    pub evolution_drawn: [u64; 3],
    pub evolution_applied: [u64; 3],
}

impl Diagnostics {
    pub fn growth_skipped(&self) -> u64 {
        (0..3)
            .map(|k| self.growth_drawn[k] - self.growth_applied[k])
            .sum()
    }

    pub fn evolution_skipped(&self) -> u64 {
        (0..3)
            .map(|k| self.evolution_drawn[k] - self.evolution_applied[k])
            .sum()
    }
}

/// What happened during one evolution event; handed to observers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvolutionRecord {
    pub mechanism: EvolutionMechanism,
    pub applied: bool,
    pub edges_before: usize,
    pub edges_after: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub graph: Graph,
    pub diagnostics: Diagnostics,
}

pub fn sample_event_counts<R: Rng + ?Sized>(theta: &Theta, rng: &mut R) -> (u64, u64) {
    let vg = sample_poisson(theta.lambda_g, rng);
    let ve = sample_poisson(theta.lambda_e, rng);
    (vg, ve)
}

pub fn grow_network<R: Rng + ?Sized>(theta: &Theta, config: &SimConfig, rng: &mut R) -> Simulation {
    grow_network_observed(theta, config, rng, |_| {})
}

/// Runs the growth loop from a complete seed graph until `final_nodes` nodes
/// exist. `observe` sees every evolution event.
pub fn grow_network_observed<R, O>(
    theta: &Theta,
    config: &SimConfig,
    rng: &mut R,
    mut observe: O,
) -> Simulation
where
    R: Rng + ?Sized,
    O: FnMut(&EvolutionRecord),
{
    let mut g = Graph::complete(config.seed_nodes);
    let mut diag = Diagnostics::default();
    while g.node_count() < config.final_nodes {
        let i = g.add_node();
        let vg = sample_poisson(theta.lambda_g, rng);
        for _ in 0..vg {
            let m = GrowthMechanism::ALL[sample_categorical(&theta.alpha, rng)];
            diag.growth_drawn[m.index()] += 1;
            let target = select_growth_target(m, &g, i, config, rng)
                .expect("newest node always has predecessors");
            if let Some(j) = target {
                g.add_edge(i, j).expect("nodes in range");
                diag.growth_applied[m.index()] += 1;
            }
        }
        let ve = sample_poisson(theta.lambda_e, rng);
        for _ in 0..ve {
            let m = EvolutionMechanism::ALL[sample_categorical(&theta.beta, rng)];
            diag.evolution_drawn[m.index()] += 1;
            let edges_before = g.edge_count();
            let applied = apply_evolution_event(m, &mut g, config, rng);
            if applied {
                diag.evolution_applied[m.index()] += 1;
            }
            observe(&EvolutionRecord {
                mechanism: m,
                applied,
                edges_before,
                edges_after: g.edge_count(),
            });
        }
    }
    Simulation {
        graph: g,
        diagnostics: diag,
    }
}
