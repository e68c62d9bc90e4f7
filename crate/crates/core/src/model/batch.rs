use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::autodiff::{Csr, Segments, Tensor};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerVariant {
    /// Separate self and summed-neighbor transforms.
    HigherOrder,
    /// Symmetric-normalized aggregation with self-loops.
    Gcn,
    /// `(1 + eps) h_v + sum of neighbors`, then a two-layer MLP.
    Gin,
}

impl LayerVariant {
    pub const ALL: [LayerVariant; 3] = [
        LayerVariant::HigherOrder,
        LayerVariant::Gcn,
        LayerVariant::Gin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LayerVariant::HigherOrder => "higher_order",
            LayerVariant::Gcn => "gcn",
            LayerVariant::Gin => "gin",
        }
    }
}

impl std::str::FromStr for LayerVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LayerVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown layer variant {s:?}")))
    }
}

/// Input features: a constant 1.0 per node.
pub fn node_features(g: &Graph) -> Tensor {
    Tensor::new(g.node_count(), 1, vec![1.0; g.node_count()]).expect("n x 1")
}

/// Disjoint union of several graphs, with the row-to-graph map used for pooling.
#[derive(Debug, Clone)]
pub struct GraphBatch {
    pub graph_count: usize,
    pub node_count: usize,
    pub offsets: Vec<usize>,
    pub segments: Arc<Segments>,
    pub features: Tensor,
    neighbors: Vec<Vec<usize>>,
}

pub fn batch_graphs(graphs: &[&Graph]) -> Result<GraphBatch> {
    GraphBatch::new(graphs)
}

impl GraphBatch {
    pub fn new(graphs: &[&Graph]) -> Result<Self> {
        if let Some(i) = graphs.iter().position(|g| g.is_empty()) {
            return Err(Error::Contract(format!("graph {i} in batch has no nodes")));
        }
        let mut offsets = Vec::with_capacity(graphs.len());
        let mut ids = Vec::new();
        let mut neighbors = Vec::new();
        let mut offset = 0;
        for (gi, g) in graphs.iter().enumerate() {
            offsets.push(offset);
            for v in 0..g.node_count() {
                ids.push(gi);
                neighbors.push(g.neighbors(v).iter().map(|&u| u + offset).collect());
            }
            offset += g.node_count();
        }
        Ok(GraphBatch {
            graph_count: graphs.len(),
            node_count: offset,
            offsets,
            segments: Arc::new(Segments::new(ids, graphs.len())?),
            features: Tensor::new(offset, 1, vec![1.0; offset])?,
            neighbors,
        })
    }

    pub fn segment_ids(&self) -> &[usize] {
        &self.segments.ids
    }

    /// Aggregation operator for a layer variant.
    pub fn propagation(&self, variant: LayerVariant, gin_eps: f64) -> Arc<Csr> {
        let rows = match variant {
            LayerVariant::HigherOrder => self
                .neighbors
                .iter()
                .map(|nb| nb.iter().map(|&u| (u, 1.0)).collect())
                .collect(),
            LayerVariant::Gcn => {
                let inv_sqrt: Vec<f64> = self
                    .neighbors
                    .iter()
                    .map(|nb| 1.0 / ((nb.len() + 1) as f64).sqrt())
                    .collect();
                self.neighbors
                    .iter()
                    .enumerate()
                    .map(|(v, nb)| {
                        let mut row: Vec<(usize, f64)> =
                            nb.iter().map(|&u| (u, inv_sqrt[v] * inv_sqrt[u])).collect();
                        row.push((v, inv_sqrt[v] * inv_sqrt[v]));
                        row
                    })
                    .collect()
            }
            LayerVariant::Gin => self
                .neighbors
                .iter()
                .enumerate()
                .map(|(v, nb)| {
                    let mut row: Vec<(usize, f64)> = nb.iter().map(|&u| (u, 1.0)).collect();
                    row.push((v, 1.0 + gin_eps));
                    row
                })
                .collect(),
        };
        Arc::new(Csr::from_rows(rows).expect("batch-local indices"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_ids_follow_graphs() {
        let a = Graph::complete(3);
        let b = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let batch = batch_graphs(&[&a, &b]).unwrap();
        assert_eq!(batch.node_count, 7);
        assert_eq!(batch.segment_ids(), &[0, 0, 0, 1, 1, 1, 1]);
        assert_eq!(batch.offsets, vec![0, 3]);
        let p = batch.propagation(LayerVariant::HigherOrder, 0.0);
        assert_eq!(p.nnz(), 2 * (3 + 2));
        // b's edge (0,1) lands on rows 3 and 4
        assert_eq!(&p.col[p.row_ptr[3]..p.row_ptr[4]], &[4]);
    }

    #[test]
    fn single_graph_identity() {
        let g = Graph::from_edges(3, [(0, 2)]).unwrap();
        let batch = batch_graphs(&[&g]).unwrap();
        assert_eq!(batch.segment_ids(), &[0, 0, 0]);
        assert_eq!(batch.offsets, vec![0]);
    }

    #[test]
    fn empty_graph_rejected() {
        assert!(batch_graphs(&[&Graph::new()]).is_err());
    }

    #[test]
    fn features_are_ones() {
        let f = node_features(&Graph::with_nodes(5));
        assert_eq!(f.shape(), (5, 1));
        assert!(f.values.iter().all(|&x| x == 1.0));
        assert_eq!(node_features(&Graph::new()).shape(), (0, 1));
    }

    #[test]
    fn gcn_rows_are_normalized() {
        let g = Graph::complete(4);
        let p = batch_graphs(&[&g])
            .unwrap()
            .propagation(LayerVariant::Gcn, 0.0);
        for r in 0..4 {
            let s: f64 = p.weight[p.row_ptr[r]..p.row_ptr[r + 1]].iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }
}
