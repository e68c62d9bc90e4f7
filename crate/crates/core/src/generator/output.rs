//! On-disk simulation output: an edge-list file per graph plus a JSON record
//! per graph. A dataset directory holds `graphs/*.edges` and a
//! `manifest.jsonl` with one record per line.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Diagnostics, Theta};
use crate::error::{Error, Result};
use crate::graph::{load_edge_list, save_edge_list, Graph};

pub const MANIFEST: &str = "manifest.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub id: u64,
    /// Edge-list path relative to the record's directory.
    pub edges_file: String,
    pub theta: Theta,
    pub master_seed: u64,
    pub stream: u64,
    pub nodes: usize,
    pub edges: usize,
    pub diagnostics: Diagnostics,
}

/// One simulated pair plus the provenance needed to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEntry {
    pub theta: Theta,
    pub graph: Graph,
    pub diagnostics: Diagnostics,
    pub stream: u64,
}

/// Writes `<dir>/<name>.edges` and the sidecar `<dir>/<name>.json`.
pub fn write_simulation(
    dir: &Path,
    name: &str,
    entry: &DatasetEntry,
    master_seed: u64,
) -> Result<SimulationRecord> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let edges_file = format!("{name}.edges");
    save_edge_list(&entry.graph, dir.join(&edges_file))?;
    let rec = record(entry, edges_file, master_seed);
    let side = dir.join(format!("{name}.json"));
    fs::write(&side, serde_json::to_string_pretty(&rec)? + "\n")
        .map_err(|e| Error::io(&side, e))?;
    Ok(rec)
}

fn record(entry: &DatasetEntry, edges_file: String, master_seed: u64) -> SimulationRecord {
    SimulationRecord {
        id: entry.stream,
        edges_file,
        theta: entry.theta,
        master_seed,
        stream: entry.stream,
        nodes: entry.graph.node_count(),
        edges: entry.graph.edge_count(),
        diagnostics: entry.diagnostics,
    }
}

pub fn write_dataset(dir: &Path, entries: &[DatasetEntry], master_seed: u64) -> Result<()> {
    let graphs = dir.join("graphs");
    fs::create_dir_all(&graphs).map_err(|e| Error::io(&graphs, e))?;
    let path = dir.join(MANIFEST);
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut out = BufWriter::new(file);
    for e in entries {
        let rel = format!("graphs/{:07}.edges", e.stream);
        save_edge_list(&e.graph, dir.join(&rel))?;
        let line = serde_json::to_string(&record(e, rel, master_seed))?;
        writeln!(out, "{line}").map_err(|err| Error::io(&path, err))?;
    }
    out.flush().map_err(|e| Error::io(&path, e))
}

pub fn read_dataset(dir: &Path) -> Result<Vec<DatasetEntry>> {
    let path = dir.join(MANIFEST);
    let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(&path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SimulationRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.clone(),
            line: idx + 1,
            msg: e.to_string(),
        })?;
        let graph = load_edge_list(dir.join(&rec.edges_file))?;
        // edge lists label nodes by first appearance; the header keeps ids
        if graph.node_count() != rec.nodes {
            return Err(Error::Parse {
                path: path.clone(),
                line: idx + 1,
                msg: format!(
                    "{} has {} nodes, record says {}",
                    rec.edges_file,
                    graph.node_count(),
                    rec.nodes
                ),
            });
        }
        rec.theta.validate()?;
        out.push(DatasetEntry {
            theta: rec.theta,
            graph,
            diagnostics: rec.diagnostics,
            stream: rec.stream,
        });
    }
    Ok(out)
}
