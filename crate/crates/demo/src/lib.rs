//! WebAssembly bindings for the static demo page in `www/`.
//!
//! The exported functions take and return JSON strings; the plain-Rust
//! versions underneath are what the tests exercise.

use std::path::Path;

use mechnet::generator::{grow_network, SimConfig, Theta, PARAM_NAMES};
use mechnet::graph::parse_edge_list;
use mechnet::pipeline::summarize_draws;
use mechnet::rng::{stream, Domain};
use mechnet::summaries::{compute_summaries, SUMMARY_NAMES};
use mechnet::validation::{build_abc_pool, rejection_abc};
use mechnet::{Graph, Prior, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest network or ABC pool the page will ask for; keeps the tab responsive.
pub const MAX_NODES: usize = 400;
pub const MAX_POOL: usize = 20_000;

#[derive(Debug, Serialize)]
pub struct Network {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub summaries: Vec<(&'static str, f64)>,
    /// Growth and evolution events each mechanism actually applied.
    pub growth_events: [u64; 3],
    pub evolution_events: [u64; 3],
}

#[derive(Debug, Serialize)]
pub struct Estimate {
    pub pool: usize,
    pub accepted: usize,
    /// (name, median, lo, hi) of the 95% interval of the accepted draws.
    pub marginals: Vec<(&'static str, f64, f64, f64)>,
}

fn summary_table(g: &Graph) -> Vec<(&'static str, f64)> {
    SUMMARY_NAMES
        .iter()
        .copied()
        .zip(compute_summaries(g).to_array())
        .collect()
}

pub fn simulate(
    lambda_g: f64,
    lambda_e: f64,
    alpha: &[f64],
    beta: &[f64],
    nodes: usize,
    seed: u64,
) -> Result<Network> {
    let arr = |v: &[f64], what: &str| -> Result<[f64; 3]> {
        v.try_into()
            .map_err(|_| mechnet::Error::Config(format!("{what} needs 3 weights, got {}", v.len())))
    };
    let theta = Theta::new(lambda_g, lambda_e, arr(alpha, "alpha")?, arr(beta, "beta")?)?;
    let cfg = SimConfig::default().with_final_nodes(nodes.min(MAX_NODES));
    cfg.validate()?;
    let sim = grow_network(&theta, &cfg, &mut stream(seed, Domain::Simulate, 0));
    let d = sim.diagnostics;
    Ok(Network {
        nodes: sim.graph.node_count(),
        edges: sim.graph.sorted_edges(),
        summaries: summary_table(&sim.graph),
        growth_events: d.growth_applied,
        evolution_events: d.evolution_applied,
    })
}

pub fn parse(text: &str) -> Result<Graph> {
    Ok(parse_edge_list(text, Path::new("<input>"))?.graph)
}

pub fn summaries(edge_list: &str) -> Result<Vec<(&'static str, f64)>> {
    Ok(summary_table(&parse(edge_list)?))
}

/// Rejection ABC against a fresh prior pool simulated at the input's size.
pub fn estimate(
    edge_list: &str,
    pool_size: usize,
    accept_fraction: f64,
    seed: u64,
) -> Result<Estimate> {
    let g = parse(edge_list)?;
    let pool_size = pool_size.clamp(1, MAX_POOL);
    let cfg = SimConfig::default().with_final_nodes(g.node_count().min(MAX_NODES));
    cfg.validate()?;
    let pool = build_abc_pool(pool_size, &Prior::default(), &cfg, seed);
    let draws = rejection_abc(&g, &pool, accept_fraction)?;
    let marginals = PARAM_NAMES
        .iter()
        .copied()
        .zip(summarize_draws(&draws, 95.0))
        .map(|(n, m)| (n, m.median, m.lo, m.hi))
        .collect();
    Ok(Estimate {
        pool: pool_size,
        accepted: draws.len(),
        marginals,
    })
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = simulate)]
pub fn simulate_js(
    lambda_g: f64,
    lambda_e: f64,
    alpha: &[f64],
    beta: &[f64],
    nodes: usize,
    seed: u64,
) -> std::result::Result<String, JsError> {
    to_js(simulate(lambda_g, lambda_e, alpha, beta, nodes, seed))
}

#[wasm_bindgen(js_name = summaries)]
pub fn summaries_js(edge_list: &str) -> std::result::Result<String, JsError> {
    to_js(summaries(edge_list))
}

#[wasm_bindgen(js_name = estimate)]
pub fn estimate_js(
    edge_list: &str,
    pool_size: usize,
    accept_fraction: f64,
    seed: u64,
) -> std::result::Result<String, JsError> {
    to_js(estimate(edge_list, pool_size, accept_fraction, seed))
}
