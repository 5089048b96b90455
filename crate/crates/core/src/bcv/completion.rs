use nalgebra::DMatrix;

use super::SplitPlan;
use crate::error::{BcvError, Result};
use crate::graph::{BipartiteGraph, LabelVector, Side};
use crate::numerics::{kmeans, truncated_svd, KMeansOptions, SparseMatrix, SvdOptions, TruncatedSvd};
use crate::rng::derive_seed;

/// Which pairs of the graph count as observed (training).
#[derive(Debug, Clone, Copy)]
pub enum Observation<'a> {
    /// Every pair observed, `w = 1`.
    Full,
    /// Replication `s` of a split plan.
    Split { plan: &'a SplitPlan, s: usize },
}

impl Observation<'_> {
    pub fn w(&self) -> f64 {
        match self {
            Observation::Full => 1.0,
            Observation::Split { plan, .. } => plan.w(),
        }
    }

    pub(crate) fn check(&self, graph: &BipartiteGraph) -> Result<()> {
        if let Observation::Split { plan, s } = self {
            if plan.n1() != graph.n1() || plan.n2() != graph.n2() {
                return Err(BcvError::DimensionMismatch(format!(
                    "split plan is {}x{}, graph is {}x{}",
                    plan.n1(),
                    plan.n2(),
                    graph.n1(),
                    graph.n2()
                )));
            }
            if *s >= plan.replications() {
                return Err(BcvError::InvalidParameter(format!(
                    "replication {s} out of range ({} available)",
                    plan.replications()
                )));
            }
        }
        Ok(())
    }

    /// For each edge of `graph` (row-major order), whether it is held out.
    pub(crate) fn held_out_edges(&self, graph: &BipartiteGraph) -> Vec<bool> {
        match self {
            Observation::Full => vec![false; graph.n_edges()],
            Observation::Split { plan, s } => {
                let eval = plan.eval_pairs(*s);
                let n2 = graph.n2() as u64;
                let mut cursor = 0;
                graph
                    .edges()
                    .iter()
                    .map(|&(i, j)| {
                        let p = i as u64 * n2 + j as u64;
                        while cursor < eval.len() && eval[cursor] < p {
                            cursor += 1;
                        }
                        cursor < eval.len() && eval[cursor] == p
                    })
                    .collect()
            }
        }
    }
}

/// The partially observed matrix `Y`: training edges as ones, everything else zero.
pub fn observed_matrix(graph: &BipartiteGraph, obs: Observation<'_>) -> Result<SparseMatrix> {
    obs.check(graph)?;
    let held = obs.held_out_edges(graph);
    Ok(SparseMatrix::from_sorted_triplets(
        graph.n1(),
        graph.n2(),
        graph
            .edges()
            .iter()
            .zip(held)
            .filter(|(_, h)| !h)
            .map(|(&(i, j), _)| (i, j, 1.0)),
    ))
}

/// Rank-`k` completion `(1/w) * S_H(Y, k)`, kept in factored form.
pub fn complete_matrix(
    graph: &BipartiteGraph,
    obs: Observation<'_>,
    k: usize,
    svd: &SvdOptions,
) -> Result<TruncatedSvd> {
    let min_dim = graph.n1().min(graph.n2());
    if k == 0 || k > min_dim {
        return Err(BcvError::InvalidParameter(format!("rank {k} outside 1..={min_dim}")));
    }
    let y = observed_matrix(graph, obs)?;
    Ok(truncated_svd(&y, k, svd)?.scaled(1.0 / obs.w()))
}

/// Spectral clustering of both sides: k-means with `k1p` clusters on the rows
/// of `U` and with `k2p` clusters on the rows of `V`. Labels come back
/// renumbered in first-appearance order; empty clusters are allowed to vanish.
pub fn estimate_labels(
    completed: &TruncatedSvd,
    k1p: usize,
    k2p: usize,
    restarts: usize,
    seed: u64,
) -> Result<(LabelVector, LabelVector)> {
    let rank = k1p.min(k2p);
    if rank == 0 {
        return Err(BcvError::InvalidParameter("candidate counts must be positive".into()));
    }
    if completed.rank() != rank {
        return Err(BcvError::DimensionMismatch(format!(
            "completion has rank {}, candidate ({k1p}, {k2p}) needs {rank}",
            completed.rank()
        )));
    }
    let l1 = cluster_side(&completed.u, Side::One, k1p, restarts, seed)?;
    let l2 = cluster_side(&completed.v, Side::Two, k2p, restarts, seed)?;
    Ok((l1, l2))
}

/// k-means on the rows of `vectors`. The seed depends on the side, the rank
/// and the cluster count only, so the result can be shared by all candidates
/// with the same `(rank, clusters)` on that side.
pub(crate) fn cluster_side(
    vectors: &DMatrix<f64>,
    side: Side,
    clusters: usize,
    restarts: usize,
    seed: u64,
) -> Result<LabelVector> {
    let side_tag = match side {
        Side::One => 1,
        Side::Two => 2,
    };
    let opts = KMeansOptions {
        restarts,
        seed: derive_seed(seed, &[side_tag, vectors.ncols() as u64, clusters as u64]),
        ..KMeansOptions::default()
    };
    let res = kmeans(vectors, clusters, &opts)?;
    Ok(LabelVector::new(res.labels, clusters, side)?.renumbered())
}
