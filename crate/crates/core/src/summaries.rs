//! Whole-network summary statistics for the ABC baseline and posterior
//! predictive checks.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::graph::Graph;

pub const SUMMARY_NAMES: [&str; 10] = [
    "mean_degree",
    "sd_degree",
    "degree_entropy",
    "max_degree",
    "triangle_count",
    "two_shell_size",
    "dist3_pair_count",
    "transitivity",
    "avg_clustering",
    "edge_count",
];

/// The nine statistics used for posterior predictive checks, in plotting order.
pub const PPC_STATS: [usize; 9] = [0, 1, 2, 4, 5, 6, 7, 8, 3];

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryVector {
    pub mean_degree: f64,
    pub sd_degree: f64,
    pub degree_entropy: f64,
    pub max_degree: f64,
    pub triangle_count: f64,
    pub two_shell_size: f64,
    pub dist3_pair_count: f64,
    pub transitivity: f64,
    pub avg_clustering: f64,
    pub edge_count: f64,
}

impl SummaryVector {
    pub fn to_array(&self) -> [f64; 10] {
        [
            self.mean_degree,
            self.sd_degree,
            self.degree_entropy,
            self.max_degree,
            self.triangle_count,
            self.two_shell_size,
            self.dist3_pair_count,
            self.transitivity,
            self.avg_clustering,
            self.edge_count,
        ]
    }

    pub fn from_array(a: [f64; 10]) -> Self {
        SummaryVector {
            mean_degree: a[0],
            sd_degree: a[1],
            degree_entropy: a[2],
            max_degree: a[3],
            triangle_count: a[4],
            two_shell_size: a[5],
            dist3_pair_count: a[6],
            transitivity: a[7],
            avg_clustering: a[8],
            edge_count: a[9],
        }
    }
}

/// Triangles through each node.
pub fn node_triangles(g: &Graph) -> Vec<usize> {
    let mut t = vec![0; g.node_count()];
    for u in 0..g.node_count() {
        let nu = g.neighbors(u);
        for &v in nu.iter().filter(|&&v| v > u) {
            let nv = g.neighbors(v);
            // common neighbors w > v
            let (mut i, mut j) = (
                nu.partition_point(|&x| x <= v),
                nv.partition_point(|&x| x <= v),
            );
            while i < nu.len() && j < nv.len() {
                match nu[i].cmp(&nv[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        let w = nu[i];
                        t[u] += 1;
                        t[v] += 1;
                        t[w] += 1;
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    t
}

/// Core number of every node (bucket-based peeling).
pub fn core_numbers(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut deg = g.degrees();
    let max_d = deg.iter().copied().max().unwrap_or(0);
    let mut bins = vec![0usize; max_d + 2];
    for &d in &deg {
        bins[d] += 1;
    }
    let mut start = 0;
    for b in bins.iter_mut() {
        let c = *b;
        *b = start;
        start += c;
    }
    let mut pos = vec![0; n];
    let mut order = vec![0; n];
    for v in 0..n {
        pos[v] = bins[deg[v]];
        order[pos[v]] = v;
        bins[deg[v]] += 1;
    }
    for d in (1..=max_d + 1).rev() {
        bins[d] = bins[d - 1];
    }
    bins[0] = 0;
    for i in 0..n {
        let v = order[i];
        for &u in g.neighbors(v) {
            if deg[u] > deg[v] {
                let du = deg[u];
                let pu = pos[u];
                let pw = bins[du];
                let w = order[pw];
                if u != w {
                    order.swap(pu, pw);
                    pos[u] = pw;
                    pos[w] = pu;
                }
                bins[du] += 1;
                deg[u] -= 1;
            }
        }
    }
    deg
}

/// Unordered node pairs whose shortest path has exactly `k` edges.
pub fn pairs_at_distance(g: &Graph, k: usize) -> usize {
    let n = g.node_count();
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let mut total = 0;
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        queue.clear();
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            if dist[v] == k {
                if v > s {
                    total += 1;
                }
                continue;
            }
            for &u in g.neighbors(v) {
                if dist[u] == usize::MAX {
                    dist[u] = dist[v] + 1;
                    queue.push_back(u);
                }
            }
        }
    }
    total
}

pub fn compute_summaries(g: &Graph) -> SummaryVector {
    let n = g.node_count();
    if n == 0 {
        return SummaryVector::default();
    }
    let nf = n as f64;
    let deg = g.degrees();
    let mean = deg.iter().sum::<usize>() as f64 / nf;
    let var = deg.iter().map(|&d| (d as f64 - mean).powi(2)).sum::<f64>() / nf;
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for &d in &deg {
        *hist.entry(d).or_default() += 1;
    }
    let entropy = hist
        .values()
        .map(|&c| {
            let p = c as f64 / nf;
            -p * p.ln()
        })
        .sum::<f64>()
        .max(0.0);

    let tri = node_triangles(g);
    let triangles = tri.iter().sum::<usize>() / 3;
    let wedges: usize = deg.iter().map(|&d| d * d.saturating_sub(1) / 2).sum();
    let transitivity = if wedges == 0 {
        0.0
    } else {
        3.0 * triangles as f64 / wedges as f64
    };
    let avg_clustering = deg
        .iter()
        .zip(&tri)
        .map(|(&d, &t)| {
            if d < 2 {
                0.0
            } else {
                2.0 * t as f64 / (d * (d - 1)) as f64
            }
        })
        .sum::<f64>()
        / nf;
    let two_shell = core_numbers(g).iter().filter(|&&c| c == 2).count();

    SummaryVector {
        mean_degree: mean,
        sd_degree: var.sqrt(),
        degree_entropy: entropy,
        max_degree: deg.iter().copied().max().unwrap_or(0) as f64,
        triangle_count: triangles as f64,
        two_shell_size: two_shell as f64,
        dist3_pair_count: pairs_at_distance(g, 3) as f64,
        transitivity,
        avg_clustering,
        edge_count: g.edge_count() as f64,
    }
}

/// A z-scored pool together with the statistics that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPool {
    pub rows: Vec<Vec<f64>>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl NormalizedPool {
    /// Applies the pool's scaling to another vector; zero-spread coordinates map to 0.
    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(&v, (&m, &s))| if s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }
}

/// Z-scores every coordinate by the pool mean and population standard deviation.
pub fn normalize_pool(pool: &[Vec<f64>]) -> NormalizedPool {
    assert!(!pool.is_empty(), "normalize_pool: empty pool");
    let dim = pool[0].len();
    let n = pool.len() as f64;
    let mut means = vec![0.0; dim];
    for row in pool {
        assert_eq!(row.len(), dim, "normalize_pool: ragged pool");
        for (m, x) in means.iter_mut().zip(row) {
            *m += x;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut sds = vec![0.0; dim];
    for row in pool {
        for ((s, x), m) in sds.iter_mut().zip(row).zip(&means) {
            *s += (x - m).powi(2);
        }
    }
    sds.iter_mut().for_each(|s| *s = (*s / n).sqrt());
    // spread below rounding noise of the mean counts as constant
    for (s, m) in sds.iter_mut().zip(&means) {
        if *s <= 1e-12 * m.abs().max(1.0) {
            *s = 0.0;
        }
    }
    let mut out = NormalizedPool {
        rows: Vec::with_capacity(pool.len()),
        means,
        sds,
    };
    out.rows = pool.iter().map(|r| out.transform(r)).collect();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn k3() {
        let s = compute_summaries(&Graph::complete(3));
        assert_eq!(s.mean_degree, 2.0);
        assert_eq!(s.sd_degree, 0.0);
        assert_eq!(s.degree_entropy, 0.0);
        assert_eq!(s.triangle_count, 1.0);
        assert_eq!(s.transitivity, 1.0);
        assert_eq!(s.avg_clustering, 1.0);
        assert_eq!(s.dist3_pair_count, 0.0);
        assert_eq!(s.two_shell_size, 3.0);
    }

    #[test]
    fn path5() {
        let g = Graph::from_edges(5, (0..4).map(|v| (v, v + 1))).unwrap();
        let s = compute_summaries(&g);
        assert_eq!(s.triangle_count, 0.0);
        assert_eq!(s.dist3_pair_count, 2.0);
        assert_eq!(s.max_degree, 2.0);
        assert_eq!(s.edge_count, 4.0);
        assert_eq!(s.two_shell_size, 0.0);
    }

    #[test]
    fn k4() {
        let s = compute_summaries(&Graph::complete(4));
        assert_eq!(s.triangle_count, 4.0);
        assert_eq!(s.two_shell_size, 0.0);
        assert_eq!(core_numbers(&Graph::complete(4)), vec![3; 4]);
    }

    #[test]
    fn empty_graph_all_zero() {
        assert_eq!(compute_summaries(&Graph::new()), SummaryVector::default());
        let s = compute_summaries(&Graph::with_nodes(3));
        assert_eq!(s.mean_degree, 0.0);
        assert_eq!(s.transitivity, 0.0);
    }

    #[test]
    fn normalize_identical_pool() {
        let pool = vec![vec![3.0, -1.0]; 5];
        let z = normalize_pool(&pool);
        assert!(z.rows.iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn normalize_two_points() {
        let z = normalize_pool(&[vec![0.0], vec![2.0]]);
        assert_eq!(z.rows, vec![vec![-1.0], vec![1.0]]);
        assert_eq!(z.means, vec![1.0]);
        assert_eq!(z.sds, vec![1.0]);
    }

    #[test]
    fn normalized_moments() {
        let pool: Vec<Vec<f64>> = (0..37)
            .map(|i| vec![(i as f64 * 1.7).sin() * 40.0 + 3.0, (i * i) as f64])
            .collect();
        let z = normalize_pool(&pool);
        for c in 0..2 {
            let m = z.rows.iter().map(|r| r[c]).sum::<f64>() / 37.0;
            let v = z.rows.iter().map(|r| (r[c] - m).powi(2)).sum::<f64>() / 37.0;
            assert_abs_diff_eq!(m, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(v.sqrt(), 1.0, epsilon = 1e-12);
        }
    }
}
