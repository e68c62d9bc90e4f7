//! The six edge-level mechanisms: three growth rules that attach the newest
//! node, three edge-conserving rewiring rules.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SimConfig;
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GrowthMechanism {
    /// RA: uniform over earlier nodes.
    RandomAttachment,
    /// PA: proportional to degree.
    PreferentialAttachment,
    /// NPA: proportional to `1 / (degree + eps)`.
    NegativePreferentialAttachment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EvolutionMechanism {
    /// TF: close an open wedge, drop an edge that lies in no triangle.
    TriangleFormation,
    /// NPA-PA: join a low-degree node to a high-degree node, drop a random edge.
    DisassortativeRewiring,
    /// RA-PA: join a uniform node to a high-degree node, drop a random edge.
    PreferentialRewiring,
}

impl GrowthMechanism {
    pub const ALL: [GrowthMechanism; 3] = [
        GrowthMechanism::RandomAttachment,
        GrowthMechanism::PreferentialAttachment,
        GrowthMechanism::NegativePreferentialAttachment,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn short_name(self) -> &'static str {
        ["RA", "PA", "NPA"][self.index()]
    }
}

impl EvolutionMechanism {
    pub const ALL: [EvolutionMechanism; 3] = [
        EvolutionMechanism::TriangleFormation,
        EvolutionMechanism::DisassortativeRewiring,
        EvolutionMechanism::PreferentialRewiring,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn short_name(self) -> &'static str {
        ["TF", "NPA-PA", "RA-PA"][self.index()]
    }
}

/// Cumulative inverse-degree weights over nodes `0..n`, for repeated NPA draws.
pub struct InverseDegreeSampler {
    cumulative: Vec<f64>,
}

impl InverseDegreeSampler {
    pub fn new(g: &Graph, n: usize, eps: f64) -> Self {
        let mut acc = 0.0;
        let cumulative = (0..n)
            .map(|j| {
                acc += 1.0 / (g.degree(j) as f64 + eps);
                acc
            })
            .collect();
        InverseDegreeSampler { cumulative }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("nonempty candidate set");
        let u = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }
}

/// Degree-proportional draw restricted to nodes `< limit`; uniform when none of
/// them has an edge.
fn sample_pa_prefix<R: Rng + ?Sized>(g: &Graph, limit: usize, rng: &mut R) -> usize {
    if g.edge_count() == 0 {
        return rng.random_range(0..limit);
    }
    // Every edge touches at least one node below `limit` whenever `limit`
    // excludes only the newest node, so this terminates quickly.
    loop {
        let j = g.sample_degree_proportional(rng).expect("graph has edges");
        if j < limit {
            return j;
        }
    }
}

/// Picks the partner of newest node `i` for one growth event. Draws already
/// adjacent to `i` are redrawn up to `max_mechanism_retries` times; `None`
/// when every attempt hit an existing neighbor.
pub fn select_growth_target<R: Rng + ?Sized>(
    mechanism: GrowthMechanism,
    g: &Graph,
    i: usize,
    config: &SimConfig,
    rng: &mut R,
) -> Result<Option<usize>> {
    if i == 0 || i >= g.node_count() {
        return Err(Error::Contract(format!(
            "growth target for node {i}: no earlier nodes to attach to"
        )));
    }
    let npa = matches!(mechanism, GrowthMechanism::NegativePreferentialAttachment)
        .then(|| InverseDegreeSampler::new(g, i, config.npa_epsilon));
    for _ in 0..config.max_mechanism_retries {
        let j = match mechanism {
            GrowthMechanism::RandomAttachment => rng.random_range(0..i),
            GrowthMechanism::PreferentialAttachment => sample_pa_prefix(g, i, rng),
            GrowthMechanism::NegativePreferentialAttachment => {
                npa.as_ref().expect("sampler").sample(rng)
            }
        };
        if !g.has_edge(i, j) {
            return Ok(Some(j));
        }
    }
    Ok(None)
}

fn not_in_triangle(g: &Graph, u: usize, v: usize) -> bool {
    !g.edge_in_triangle(u, v)
}

/// Adds `(a, b)`, then removes an edge chosen by `removable`; rolls back the
/// addition when nothing is removable.
fn add_then_remove<R, F>(g: &mut Graph, a: usize, b: usize, removable: F, rng: &mut R) -> bool
where
    R: Rng + ?Sized,
    F: Fn(&Graph, usize, usize) -> bool,
{
    let inserted = g.add_edge(a, b).expect("nodes in range");
    debug_assert!(inserted);
    match g.sample_uniform_edge(rng, Some(removable)) {
        Some((u, v)) => {
            g.remove_edge(u, v);
            true
        }
        None => {
            g.remove_edge(a, b);
            false
        }
    }
}

/// Two distinct non-adjacent neighbors of `j`, uniformly among such pairs.
fn open_wedge<R: Rng + ?Sized>(g: &Graph, j: usize, rng: &mut R) -> Option<(usize, usize)> {
    let nb = g.neighbors(j);
    let d = nb.len();
    if d < 2 {
        return None;
    }
    for _ in 0..8 {
        let a = rng.random_range(0..d);
        let mut b = rng.random_range(0..d - 1);
        if b >= a {
            b += 1;
        }
        if !g.has_edge(nb[a], nb[b]) {
            return Some((nb[a], nb[b]));
        }
    }
    let mut open = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            if !g.has_edge(nb[a], nb[b]) {
                open.push((nb[a], nb[b]));
            }
        }
    }
    if open.is_empty() {
        None
    } else {
        Some(open[rng.random_range(0..open.len())])
    }
}

/// Applies one edge-conserving rewiring. Returns `false`, leaving `g`
/// untouched, when no valid new edge is found within the retry budget or no
/// edge can be removed afterwards.
pub fn apply_evolution_event<R: Rng + ?Sized>(
    mechanism: EvolutionMechanism,
    g: &mut Graph,
    config: &SimConfig,
    rng: &mut R,
) -> bool {
    let n = g.node_count();
    if n < 2 {
        return false;
    }
    match mechanism {
        EvolutionMechanism::TriangleFormation => {
            let hubs: Vec<usize> = (0..n).filter(|&v| g.degree(v) >= 2).collect();
            if hubs.is_empty() {
                return false;
            }
            for _ in 0..config.max_mechanism_retries {
                let j = hubs[rng.random_range(0..hubs.len())];
                if let Some((k, l)) = open_wedge(g, j, rng) {
                    return add_then_remove(g, k, l, not_in_triangle, rng);
                }
            }
            false
        }
        EvolutionMechanism::DisassortativeRewiring | EvolutionMechanism::PreferentialRewiring => {
            if g.edge_count() == 0 {
                return false;
            }
            let npa = matches!(mechanism, EvolutionMechanism::DisassortativeRewiring)
                .then(|| InverseDegreeSampler::new(g, n, config.npa_epsilon));
            for _ in 0..config.max_mechanism_retries {
                let j = match &npa {
                    Some(s) => s.sample(rng),
                    None => rng.random_range(0..n),
                };
                let k = g.sample_degree_proportional(rng).expect("graph has edges");
                if j == k || g.has_edge(j, k) {
                    continue;
                }
                let added = (j.min(k), j.max(k));
                return add_then_remove(g, j, k, move |_, u, v| (u, v) != added, rng);
            }
            false
        }
    }
}
