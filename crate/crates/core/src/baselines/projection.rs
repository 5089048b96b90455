use crate::graph::{BipartiteGraph, Side};

/// Undirected graph with nonnegative weights, stored as sorted adjacency lists.
/// Symmetric with an empty diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    /// Builds from undirected `(u, v, w)` entries; each pair should appear once.
    /// Self-loops and non-positive weights are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (u, v, w) in edges {
            if u != v && w > 0.0 {
                adj[u].push((v, w));
                adj[v].push((u, w));
            }
        }
        for row in &mut adj {
            row.sort_by_key(|e| e.0);
        }
        Self { adj }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adj[u]
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.adj[u]
            .binary_search_by_key(&v, |e| e.0)
            .map_or(0.0, |i| self.adj[u][i].1)
    }

    pub fn strength(&self, u: usize) -> f64 {
        self.adj[u].iter().map(|e| e.1).sum()
    }

    /// Sum of weights over unordered pairs.
    pub fn total_weight(&self) -> f64 {
        self.adj.iter().flatten().map(|e| e.1).sum::<f64>() / 2.0
    }
}

/// One-mode projection: nodes of `side` joined with weight equal to their
/// number of shared neighbours.
pub fn project(graph: &BipartiteGraph, side: Side) -> WeightedGraph {
    let owned;
    let g = match side {
        Side::One => graph,
        Side::Two => {
            owned = graph.transpose();
            &owned
        }
    };
    let n = g.n1();
    let mut counts = vec![0u32; n];
    let mut touched = Vec::new();
    let mut adj = vec![Vec::new(); n];
    for (u, row) in adj.iter_mut().enumerate() {
        for &(_, j) in g.row_edges(u) {
            for &v in g.col_neighbors(j) {
                if v != u {
                    if counts[v] == 0 {
                        touched.push(v);
                    }
                    counts[v] += 1;
                }
            }
        }
        touched.sort_unstable();
        *row = touched.iter().map(|&v| (v, f64::from(counts[v]))).collect();
        for &v in &touched {
            counts[v] = 0;
        }
        touched.clear();
    }
    WeightedGraph { adj }
}
