use nalgebra::DMatrix;
use serde::Serialize;

use super::completion::{complete_matrix, estimate_labels, Observation};
use super::{DRule, SplitPlan};
use crate::error::{BcvError, Result};
use crate::graph::{BipartiteGraph, LabelVector};
use crate::numerics::SvdOptions;
use crate::rng::derive_seed;

/// Score of one candidate `(K1', K2')` on one replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateFit {
    pub k1p: usize,
    pub k2p: usize,
    /// Truncation rank, `min(k1p, k2p)`.
    pub rank: usize,
    pub labels1: LabelVector,
    pub labels2: LabelVector,
    #[serde(skip)]
    pub b_hat: DMatrix<f64>,
    pub test_mse: f64,
    pub penalty: f64,
    pub total: f64,
}

/// Per-replication data shared by every candidate: the held-out pairs with
/// their edge indicators and the held-out flag of every graph edge.
pub(crate) struct FoldData {
    pub(crate) w: f64,
    eval_rows: Vec<u32>,
    eval_cols: Vec<u32>,
    eval_is_edge: Vec<bool>,
    edge_held: Vec<bool>,
}

impl FoldData {
    pub(crate) fn new(graph: &BipartiteGraph, obs: Observation<'_>) -> Result<Self> {
        obs.check(graph)?;
        let edge_held = obs.held_out_edges(graph);
        let (mut eval_rows, mut eval_cols, mut eval_is_edge) = (Vec::new(), Vec::new(), Vec::new());
        if let Observation::Split { plan, s } = obs {
            let eval = plan.eval_pairs(s);
            eval_rows.reserve(eval.len());
            eval_cols.reserve(eval.len());
            eval_is_edge.reserve(eval.len());
            for &p in eval {
                let (i, j) = plan.decode(p);
                eval_rows.push(i as u32);
                eval_cols.push(j as u32);
                eval_is_edge.push(graph.has_edge(i, j));
            }
        }
        Ok(Self {
            w: obs.w(),
            eval_rows,
            eval_cols,
            eval_is_edge,
            edge_held,
        })
    }

    fn n_eval(&self) -> usize {
        self.eval_rows.len()
    }

    /// Block means over training pairs; empty cells get the overall training density.
    pub(crate) fn block_estimate(&self, graph: &BipartiteGraph, l1: &LabelVector, l2: &LabelVector) -> DMatrix<f64> {
        let (k1, k2) = (l1.k(), l2.k());
        let (c1, c2) = (l1.as_slice(), l2.as_slice());
        let mut eval_pairs = vec![0u64; k1 * k2];
        let mut eval_edges = vec![0u64; k1 * k2];
        for t in 0..self.n_eval() {
            let b = c1[self.eval_rows[t] as usize] * k2 + c2[self.eval_cols[t] as usize];
            eval_pairs[b] += 1;
            eval_edges[b] += u64::from(self.eval_is_edge[t]);
        }
        let mut train_edges = vec![0u64; k1 * k2];
        for (&(i, j), &held) in graph.edges().iter().zip(&self.edge_held) {
            if !held {
                train_edges[c1[i] * k2 + c2[j]] += 1;
            }
        }
        let (n1k, n2k) = (l1.counts(), l2.counts());
        let train_pairs: Vec<u64> = (0..k1 * k2)
            .map(|b| (n1k[b / k2] as u64 * n2k[b % k2] as u64) - eval_pairs[b])
            .collect();
        let total_pairs: u64 = train_pairs.iter().sum();
        let fallback = if total_pairs > 0 {
            train_edges.iter().sum::<u64>() as f64 / total_pairs as f64
        } else {
            0.0
        };
        DMatrix::from_fn(k1, k2, |a, b| {
            let cell = a * k2 + b;
            if train_pairs[cell] > 0 {
                train_edges[cell] as f64 / train_pairs[cell] as f64
            } else {
                fallback
            }
        })
    }

    /// Mean squared error of `P_hat = B_hat[c1_i, c2_j]` over the held-out pairs.
    pub(crate) fn test_mse(&self, l1: &LabelVector, l2: &LabelVector, b_hat: &DMatrix<f64>) -> Result<f64> {
        if self.n_eval() == 0 {
            return Err(BcvError::InvalidParameter("evaluation set is empty".into()));
        }
        let (c1, c2) = (l1.as_slice(), l2.as_slice());
        let mut sse = 0.0;
        for t in 0..self.n_eval() {
            let p = b_hat[(c1[self.eval_rows[t] as usize], c2[self.eval_cols[t] as usize])];
            let a = if self.eval_is_edge[t] { 1.0 } else { 0.0 };
            sse += (a - p) * (a - p);
        }
        Ok(sse / self.n_eval() as f64)
    }

    pub(crate) fn score(
        &self,
        graph: &BipartiteGraph,
        labels1: LabelVector,
        labels2: LabelVector,
        lambda: f64,
        d_rule: &DRule,
    ) -> Result<CandidateFit> {
        let (k1p, k2p) = (labels1.k(), labels2.k());
        let b_hat = self.block_estimate(graph, &labels1, &labels2);
        let test_mse = self.test_mse(&labels1, &labels2, &b_hat)?;
        let penalty = d_rule.complexity(k1p, k2p) * lambda;
        Ok(CandidateFit {
            k1p,
            k2p,
            rank: k1p.min(k2p),
            labels1,
            labels2,
            b_hat,
            test_mse,
            penalty,
            total: test_mse + penalty,
        })
    }
}

fn check_labels(graph: &BipartiteGraph, l1: &LabelVector, l2: &LabelVector) -> Result<()> {
    if l1.len() != graph.n1() || l2.len() != graph.n2() {
        return Err(BcvError::DimensionMismatch(format!(
            "labels of length ({}, {}) for a {}x{} graph",
            l1.len(),
            l2.len(),
            graph.n1(),
            graph.n2()
        )));
    }
    Ok(())
}

/// Estimated block probabilities from the training pairs of `obs`.
pub fn estimate_blocks(
    graph: &BipartiteGraph,
    obs: Observation<'_>,
    labels1: &LabelVector,
    labels2: &LabelVector,
) -> Result<DMatrix<f64>> {
    check_labels(graph, labels1, labels2)?;
    Ok(FoldData::new(graph, obs)?.block_estimate(graph, labels1, labels2))
}

/// Penalized held-out loss of fixed labels on replication `s`. The candidate
/// size is taken from the declared label counts.
pub fn score_labels(
    graph: &BipartiteGraph,
    plan: &SplitPlan,
    s: usize,
    labels1: &LabelVector,
    labels2: &LabelVector,
    lambda: f64,
    d_rule: &DRule,
) -> Result<CandidateFit> {
    check_labels(graph, labels1, labels2)?;
    FoldData::new(graph, Observation::Split { plan, s })?.score(graph, labels1.clone(), labels2.clone(), lambda, d_rule)
}

/// Full pipeline for one candidate on one replication: completion, spectral
/// clustering, block estimation and penalized held-out loss. `seed` is the
/// master seed; per-replication streams are derived from it exactly as
/// [`super::select`] does.
#[allow(clippy::too_many_arguments)]
pub fn candidate_loss(
    graph: &BipartiteGraph,
    plan: &SplitPlan,
    s: usize,
    k1p: usize,
    k2p: usize,
    lambda: f64,
    d_rule: &DRule,
    restarts: usize,
    seed: u64,
) -> Result<CandidateFit> {
    if k1p == 0 || k2p == 0 {
        return Err(BcvError::InvalidParameter("candidate counts must be positive".into()));
    }
    let obs = Observation::Split { plan, s };
    let rep_seed = replication_seed(seed, s);
    let svd = SvdOptions {
        seed: rep_seed,
        ..SvdOptions::default()
    };
    let completed = complete_matrix(graph, obs, k1p.min(k2p), &svd)?;
    let (l1, l2) = estimate_labels(&completed, k1p, k2p, restarts, rep_seed)?;
    FoldData::new(graph, obs)?.score(graph, l1, l2, lambda, d_rule)
}

pub(crate) fn replication_seed(master: u64, s: usize) -> u64 {
    derive_seed(master, &[s as u64])
}
