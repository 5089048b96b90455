//! Bipartite graphs, label vectors and the bipartite stochastic block model.

mod datasets;
mod io;
mod sbm;

pub use datasets::{southern_women, SOUTHERN_WOMEN_EDGELIST, SOUTHERN_WOMEN_EVENTS, SOUTHERN_WOMEN_NAMES};
pub use io::{ingest_edgelist, parse_edgelist, EdgelistOptions, Ingested};
pub use sbm::{generate_sbm, true_mean_matrix, Membership, SbmSpec};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{BcvError, Result};

/// A 0/1 bi-adjacency matrix stored sparsely.
///
/// Edges are kept as a row-major sorted coordinate list together with CSR
/// (row) and CSC (column) indices. The graph is immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    n1: usize,
    n2: usize,
    edges: Vec<(usize, usize)>,
    row_ptr: Vec<usize>,
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
}

impl BipartiteGraph {
    /// Builds a graph from edge coordinates. Repeated edges are collapsed.
    pub fn new(n1: usize, n2: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::build(n1, n2, edges.into_iter().collect()).map(|(g, _)| g)
    }

    /// Like [`BipartiteGraph::new`], also reporting how many duplicates were dropped.
    pub fn new_dedup(n1: usize, n2: usize, edges: Vec<(usize, usize)>) -> Result<(Self, usize)> {
        Self::build(n1, n2, edges)
    }

    fn build(n1: usize, n2: usize, mut edges: Vec<(usize, usize)>) -> Result<(Self, usize)> {
        if n1 == 0 || n2 == 0 {
            return Err(BcvError::EmptyGraph(format!(
                "side sizes must be positive, got {n1}x{n2}"
            )));
        }
        if let Some(&(i, j)) = edges.iter().find(|&&(i, j)| i >= n1 || j >= n2) {
            return Err(BcvError::DimensionMismatch(format!(
                "edge ({i}, {j}) outside a {n1}x{n2} graph"
            )));
        }
        edges.sort_unstable();
        let before = edges.len();
        edges.dedup();
        let duplicates = before - edges.len();

        let mut row_ptr = vec![0usize; n1 + 1];
        let mut col_ptr = vec![0usize; n2 + 1];
        for &(i, j) in &edges {
            row_ptr[i + 1] += 1;
            col_ptr[j + 1] += 1;
        }
        for i in 0..n1 {
            row_ptr[i + 1] += row_ptr[i];
        }
        for j in 0..n2 {
            col_ptr[j + 1] += col_ptr[j];
        }
        let mut fill = col_ptr.clone();
        let mut col_rows = vec![0usize; edges.len()];
        for &(i, j) in &edges {
            col_rows[fill[j]] = i;
            fill[j] += 1;
        }
        Ok((
            Self {
                n1,
                n2,
                edges,
                row_ptr,
                col_ptr,
                col_rows,
            },
            duplicates,
        ))
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_pairs(&self) -> usize {
        self.n1 * self.n2
    }

    /// Fraction of the n1*n2 pairs that carry an edge.
    pub fn density(&self) -> f64 {
        self.edges.len() as f64 / (self.n1 as f64 * self.n2 as f64)
    }

    /// All edges in row-major order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Edges of side-1 node `i`, as a row-major slice of coordinates.
    pub fn row_edges(&self, i: usize) -> &[(usize, usize)] {
        &self.edges[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Side-1 neighbours of side-2 node `j`, ascending.
    pub fn col_neighbors(&self, j: usize) -> &[usize] {
        &self.col_rows[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    pub fn row_degree(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn col_degree(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n1 && j < self.n2 && self.row_edges(i).binary_search(&(i, j)).is_ok()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n1, self.n2);
        for &(i, j) in &self.edges {
            m[(i, j)] = 1.0;
        }
        m
    }

    /// The same graph with the two sides swapped.
    pub fn transpose(&self) -> Self {
        Self::new(self.n2, self.n1, self.edges.iter().map(|&(i, j)| (j, i)))
            .expect("transpose of a valid graph is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    One,
    Two,
}

/// Community labels for the nodes of one side, each in `0..k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelVector {
    labels: Vec<usize>,
    k: usize,
    side: Side,
}

impl LabelVector {
    pub fn new(labels: Vec<usize>, k: usize, side: Side) -> Result<Self> {
        if k == 0 {
            return Err(BcvError::InvalidParameter("label count k must be positive".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(BcvError::InvalidParameter(format!("label {bad} out of range 0..{k}")));
        }
        Ok(Self { labels, k, side })
    }

    /// Builds a label vector with `k` set to one past the largest label.
    pub fn from_labels(labels: Vec<usize>, side: Side) -> Self {
        let k = labels.iter().max().map_or(1, |m| m + 1);
        Self { labels, k, side }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Declared number of communities.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Community sizes, length `k`.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.k];
        for &l in &self.labels {
            c[l] += 1;
        }
        c
    }

    pub fn n_nonempty(&self) -> usize {
        self.counts().iter().filter(|&&c| c > 0).count()
    }

    /// One-hot membership matrix (n x k).
    pub fn membership_matrix(&self) -> DMatrix<f64> {
        let mut z = DMatrix::zeros(self.labels.len(), self.k);
        for (i, &l) in self.labels.iter().enumerate() {
            z[(i, l)] = 1.0;
        }
        z
    }

    /// Relabels in first-appearance order so labels cover `0..n_nonempty`.
    /// The declared `k` is kept.
    pub fn renumbered(&self) -> Self {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect();
        Self {
            labels,
            k: self.k,
            side: self.side,
        }
    }
}
