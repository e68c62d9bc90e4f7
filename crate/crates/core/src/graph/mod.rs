//! Undirected simple graphs with dense, insertion-ordered node identifiers.
//!
//! Node `i` is the `i`-th node added, so "all nodes that existed before `i`"
//! is the prefix `0..i`. Adjacency is kept as sorted neighbor lists; the edge
//! list is maintained alongside it so a uniform edge can be drawn in O(1).

mod io;

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{
    flatten_contacts, load_contacts, load_edge_list, load_labeled_edge_list, parse_contacts,
    parse_edge_list, save_edge_list, write_edge_list, ContactRecord, LabeledGraph,
};

/// Rejection attempts before [`Graph::sample_uniform_edge`] falls back to a full scan.
const REJECTION_TRIES: usize = 64;

#[inline]
fn key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    position: HashMap<(usize, usize), usize>,
}

/// Graphs compare by node count and edge set, not by edge storage order.
impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.adjacency == other.adjacency
    }
}

impl Eq for Graph {}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl From<GraphRepr> for Graph {
    fn from(r: GraphRepr) -> Self {
        let mut g = Graph::with_nodes(r.nodes);
        for (u, v) in r.edges {
            if u < r.nodes && v < r.nodes {
                g.insert(u, v);
            }
        }
        g
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr {
            nodes: g.node_count(),
            edges: g.edges,
        }
    }
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_nodes(n: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); n],
            ..Default::default()
        }
    }

    /// Complete graph on `n` nodes.
    pub fn complete(n: usize) -> Self {
        let mut g = Graph::with_nodes(n);
        for u in 0..n {
            for v in u + 1..n {
                g.insert(u, v);
            }
        }
        g
    }

    /// Builds a graph from an edge iterator, silently dropping loops and duplicates.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Graph::with_nodes(n);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn add_node(&mut self) -> usize {
        self.adjacency.push(Vec::new());
        self.adjacency.len() - 1
    }

    /// Inserts `(u, v)`. Returns `false` for self-loops and already present edges.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool> {
        let n = self.node_count();
        for node in [u, v] {
            if node >= n {
                return Err(Error::NodeOutOfRange {
                    node,
                    node_count: n,
                });
            }
        }
        Ok(self.insert(u, v))
    }

    fn insert(&mut self, u: usize, v: usize) -> bool {
        if u == v {
            return false;
        }
        let Err(pos_u) = self.adjacency[u].binary_search(&v) else {
            return false;
        };
        self.adjacency[u].insert(pos_u, v);
        let pos_v = self.adjacency[v].binary_search(&u).unwrap_err();
        self.adjacency[v].insert(pos_v, u);
        let k = key(u, v);
        self.position.insert(k, self.edges.len());
        self.edges.push(k);
        true
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        let k = key(u, v);
        let Some(idx) = self.position.remove(&k) else {
            return false;
        };
        self.edges.swap_remove(idx);
        if idx < self.edges.len() {
            self.position.insert(self.edges[idx], idx);
        }
        for (a, b) in [(u, v), (v, u)] {
            let adj = &mut self.adjacency[a];
            let pos = adj.binary_search(&b).expect("adjacency out of sync");
            adj.remove(pos);
        }
        true
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Edges as `(min, max)` pairs, in storage order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edges sorted lexicographically; stable across storage reorderings.
    pub fn sorted_edges(&self) -> Vec<(usize, usize)> {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e
    }

    /// Number of common neighbors of `u` and `v`.
    pub fn common_neighbors(&self, u: usize, v: usize) -> usize {
        let (a, b) = (&self.adjacency[u], &self.adjacency[v]);
        let (mut i, mut j, mut c) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    c += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        c
    }

    /// Whether edge `(u, v)` closes at least one triangle.
    pub fn edge_in_triangle(&self, u: usize, v: usize) -> bool {
        let (a, b) = (&self.adjacency[u], &self.adjacency[v]);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Draws an edge uniformly among those accepted by `predicate`
    /// (all edges when `None`). Returns `None` when no edge qualifies.
    pub fn sample_uniform_edge<R, F>(
        &self,
        rng: &mut R,
        predicate: Option<F>,
    ) -> Option<(usize, usize)>
    where
        R: Rng + ?Sized,
        F: Fn(&Graph, usize, usize) -> bool,
    {
        if self.edges.is_empty() {
            return None;
        }
        let Some(pred) = predicate else {
            return Some(self.edges[rng.random_range(0..self.edges.len())]);
        };
        for _ in 0..REJECTION_TRIES {
            let (u, v) = self.edges[rng.random_range(0..self.edges.len())];
            if pred(self, u, v) {
                return Some((u, v));
            }
        }
        let qualifying: Vec<_> = self
            .edges
            .iter()
            .copied()
            .filter(|&(u, v)| pred(self, u, v))
            .collect();
        if qualifying.is_empty() {
            None
        } else {
            Some(qualifying[rng.random_range(0..qualifying.len())])
        }
    }

    /// Draws a node with probability proportional to its degree by picking a
    /// random endpoint of a uniform edge. `None` when there are no edges.
    pub fn sample_degree_proportional<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        if self.edges.is_empty() {
            return None;
        }
        let (u, v) = self.edges[rng.random_range(0..self.edges.len())];
        Some(if rng.random_bool(0.5) { u } else { v })
    }

    /// Graph with node `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.node_count(), "permutation length");
        let mut g = Graph::with_nodes(self.node_count());
        for &(u, v) in &self.edges {
            g.insert(perm[u], perm[v]);
        }
        g
    }

    /// Full consistency scan: no loops, no duplicates, adjacency and edge list agree.
    pub fn check_simple(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Contract(m));
        let mut half_edges = 0;
        for (u, adj) in self.adjacency.iter().enumerate() {
            if adj.windows(2).any(|w| w[0] >= w[1]) {
                return fail(format!("neighbors of {u} not strictly sorted"));
            }
            for &v in adj {
                if v == u {
                    return fail(format!("self-loop at {u}"));
                }
                if v >= self.node_count() || self.adjacency[v].binary_search(&u).is_err() {
                    return fail(format!("asymmetric adjacency {u}-{v}"));
                }
                if !self.position.contains_key(&key(u, v)) {
                    return fail(format!("edge {u}-{v} missing from edge list"));
                }
            }
            half_edges += adj.len();
        }
        if half_edges != 2 * self.edges.len() || self.position.len() != self.edges.len() {
            return fail("edge list and adjacency sizes disagree".into());
        }
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if u >= v || self.position.get(&(u, v)) != Some(&i) {
                return fail(format!("edge list entry {i} inconsistent"));
            }
        }
        Ok(())
    }
}
