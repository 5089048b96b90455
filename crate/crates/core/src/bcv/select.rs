use std::collections::HashMap;
use std::path::Path;

use log::{debug, warn};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::blocks::{replication_seed, FoldData};
use super::completion::{cluster_side, complete_matrix, estimate_labels, observed_matrix, Observation};
use super::{make_split, penalty_factor_with, BcvConfig, SplitPlan};
use crate::error::{BcvError, Result};
use crate::graph::{BipartiteGraph, LabelVector, Side};
use crate::numerics::{truncated_svd, SparseMatrix, SvdOptions, TruncatedSvd};

/// Replication-averaged loss of one visited candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    #[serde(rename = "K1")]
    pub k1: usize,
    #[serde(rename = "K2")]
    pub k2: usize,
    pub mse: f64,
    pub penalty: f64,
    pub total: f64,
    /// Frontier step at which the candidate was visited.
    #[serde(rename = "n_visited_step")]
    pub step: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierStep {
    pub step: usize,
    pub evaluated: usize,
    pub step_best: (usize, usize, f64),
    pub best_so_far: (usize, usize, f64),
    pub improved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub k1_hat: usize,
    pub k2_hat: usize,
    /// Every visited candidate, sorted by `(K1, K2)`.
    pub surface: Vec<SurfacePoint>,
    pub trace: Vec<FrontierStep>,
    pub lambda: f64,
    pub rho_hat: f64,
    pub replications: usize,
}

impl SelectionResult {
    pub fn get(&self, k1: usize, k2: usize) -> Option<&SurfacePoint> {
        self.surface
            .binary_search_by(|p| (p.k1, p.k2).cmp(&(k1, k2)))
            .ok()
            .map(|i| &self.surface[i])
    }

    /// Visited candidates with the given `K1`, ascending in `K2`.
    pub fn slice_k1(&self, k1: usize) -> Vec<SurfacePoint> {
        self.surface.iter().filter(|p| p.k1 == k1).copied().collect()
    }
}

/// Ordering used for the argmin: lower total, then fewer parameters, then smaller `K1`.
fn better(a: &SurfacePoint, b: &SurfacePoint) -> bool {
    (a.total, a.k1 * a.k2, a.k1) < (b.total, b.k1 * b.k2, b.k1)
}

fn argmin<'a>(points: impl IntoIterator<Item = &'a SurfacePoint>) -> Option<&'a SurfacePoint> {
    points
        .into_iter()
        .fold(None, |best: Option<&SurfacePoint>, p| match best {
            Some(b) if !better(p, b) => Some(b),
            _ => Some(p),
        })
}

/// Candidates added at frontier step `k`: all pairs with `max(K1', K2') = k`.
fn frontier(k: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<_> = (1..=k).map(|k2| (k, k2)).chain((1..k).map(|k1| (k1, k))).collect();
    pairs.sort_unstable();
    pairs
}

/// Per-replication state, with completions and side clusterings cached so
/// that candidates sharing a rank or a cluster count reuse them.
struct FoldState {
    rep_seed: u64,
    data: FoldData,
    y: SparseMatrix,
    full_svd: Option<TruncatedSvd>,
    by_rank: HashMap<usize, TruncatedSvd>,
    clusters: HashMap<(Side, usize, usize), LabelVector>,
}

impl FoldState {
    fn new(graph: &BipartiteGraph, plan: &SplitPlan, s: usize, seed: u64) -> Result<Self> {
        let obs = Observation::Split { plan, s };
        Ok(Self {
            rep_seed: replication_seed(seed, s),
            data: FoldData::new(graph, obs)?,
            y: observed_matrix(graph, obs)?,
            full_svd: None,
            by_rank: HashMap::new(),
            clusters: HashMap::new(),
        })
    }

    fn completion(&mut self, graph: &BipartiteGraph, k: usize) -> Result<TruncatedSvd> {
        let opts = SvdOptions {
            seed: self.rep_seed,
            ..SvdOptions::default()
        };
        let min_dim = graph.n1().min(graph.n2());
        if min_dim <= opts.dense_cutoff {
            // Exact path: one full decomposition serves every rank.
            if self.full_svd.is_none() {
                self.full_svd = Some(truncated_svd(&self.y, min_dim, &opts)?);
            }
            let full = self.full_svd.as_ref().expect("just filled");
            return Ok(full.truncate(k).scaled(1.0 / self.data.w));
        }
        if let Some(c) = self.by_rank.get(&k) {
            return Ok(c.clone());
        }
        let c = truncated_svd(&self.y, k, &opts)?.scaled(1.0 / self.data.w);
        self.by_rank.insert(k, c.clone());
        Ok(c)
    }

    fn labels(&mut self, vectors: &DMatrix<f64>, side: Side, clusters: usize, restarts: usize) -> Result<LabelVector> {
        let key = (side, vectors.ncols(), clusters);
        if let Some(l) = self.clusters.get(&key) {
            return Ok(l.clone());
        }
        let l = cluster_side(vectors, side, clusters, restarts, self.rep_seed)?;
        self.clusters.insert(key, l.clone());
        Ok(l)
    }

    fn mse(&mut self, graph: &BipartiteGraph, k1: usize, k2: usize, restarts: usize) -> Result<f64> {
        let c = self.completion(graph, k1.min(k2))?;
        let l1 = self.labels(&c.u, Side::One, k1, restarts)?;
        let l2 = self.labels(&c.v, Side::Two, k2, restarts)?;
        let b_hat = self.data.block_estimate(graph, &l1, &l2);
        self.data.test_mse(&l1, &l2, &b_hat)
    }
}

/// Chooses `(K1, K2)` by frontier search over the penalized cross-validated loss.
///
/// The split plan is `make_split(n1, n2, cfg.split_mode(), cfg.seed)`, and each
/// replication's random streams derive from `cfg.seed` the same way as in
/// [`super::candidate_loss`], so the surface does not depend on scheduling.
pub fn select(graph: &BipartiteGraph, cfg: &BcvConfig) -> Result<SelectionResult> {
    cfg.validate()?;
    let rho_hat = graph.density();
    let lambda = penalty_factor_with(graph, cfg.c, cfg.penalty_form)?;
    let plan = make_split(graph.n1(), graph.n2(), cfg.split_mode(), cfg.seed)?;
    let reps = plan.replications();
    let mut folds = (0..reps)
        .into_par_iter()
        .map(|s| FoldState::new(graph, &plan, s, cfg.seed))
        .collect::<Result<Vec<_>>>()?;

    let min_dim = graph.n1().min(graph.n2());
    let max_frontier = cfg.max_frontier.unwrap_or(min_dim).min(min_dim);
    let mut surface: Vec<SurfacePoint> = Vec::new();
    let mut trace = Vec::new();
    let mut best: Option<SurfacePoint> = None;
    let mut stall = 0;

    for step in 1..=max_frontier {
        let candidates = frontier(step);
        let per_fold = folds
            .par_iter_mut()
            .map(|fold| {
                candidates
                    .iter()
                    .map(|&(k1, k2)| fold.mse(graph, k1, k2, cfg.restarts))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let new_points: Vec<SurfacePoint> = candidates
            .iter()
            .enumerate()
            .map(|(c, &(k1, k2))| {
                let mse = per_fold.iter().map(|f| f[c]).sum::<f64>() / reps as f64;
                let penalty = cfg.d_rule.complexity(k1, k2) * lambda;
                SurfacePoint {
                    k1,
                    k2,
                    mse,
                    penalty,
                    total: mse + penalty,
                    step,
                }
            })
            .collect();
        let step_best = *argmin(&new_points).expect("frontier is never empty");
        let improved = best.is_none_or(|b| step_best.total < b.total);
        if improved {
            best = Some(step_best);
            stall = 0;
        } else {
            stall += 1;
        }
        let b = best.expect("set on first step");
        debug!("frontier step {step}: best ({}, {}) total {:.6e}", b.k1, b.k2, b.total);
        trace.push(FrontierStep {
            step,
            evaluated: new_points.len(),
            step_best: (step_best.k1, step_best.k2, step_best.total),
            best_so_far: (b.k1, b.k2, b.total),
            improved,
        });
        surface.extend(new_points);
        if cfg.patience.is_some_and(|p| stall >= p) {
            break;
        }
    }

    if lambda == 0.0 {
        warn!("zero penalty factor; selection reduces to unpenalized cross-validation");
    }
    surface.sort_by_key(|p| (p.k1, p.k2));
    let winner = *argmin(&surface).expect("at least one step ran");
    Ok(SelectionResult {
        k1_hat: winner.k1,
        k2_hat: winner.k2,
        surface,
        trace,
        lambda,
        rho_hat,
        replications: reps,
    })
}

/// Labels and block estimate for `(k1, k2)` fitted on the fully observed graph.
pub fn fit_full(
    graph: &BipartiteGraph,
    k1: usize,
    k2: usize,
    cfg: &BcvConfig,
) -> Result<(LabelVector, LabelVector, DMatrix<f64>)> {
    let svd = SvdOptions {
        seed: cfg.seed,
        ..SvdOptions::default()
    };
    let completed = complete_matrix(graph, Observation::Full, k1.min(k2), &svd)?;
    let (l1, l2) = estimate_labels(&completed, k1, k2, cfg.restarts, cfg.seed)?;
    let b = super::estimate_blocks(graph, Observation::Full, &l1, &l2)?;
    Ok((l1, l2, b))
}

/// Writes the loss surface as `K1,K2,mse,penalty,total,n_visited_step`.
pub fn write_surface_csv(result: &SelectionResult, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in &result.surface {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_surface_csv(path: impl AsRef<Path>) -> Result<Vec<SurfacePoint>> {
    let mut r = csv::Reader::from_path(path)?;
    let points = r.deserialize().collect::<std::result::Result<Vec<SurfacePoint>, _>>()?;
    let mut keys: Vec<_> = points.iter().map(|p| (p.k1, p.k2)).collect();
    keys.sort_unstable();
    if keys.windows(2).any(|w| w[0] == w[1]) {
        return Err(BcvError::Config("surface file lists a candidate twice".into()));
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frontier_has_all_pairs_with_max_k() {
        assert_eq!(frontier(1), vec![(1, 1)]);
        assert_eq!(frontier(3), vec![(1, 3), (2, 3), (3, 1), (3, 2), (3, 3)]);
        assert_eq!(frontier(6).len(), 11);
    }

    #[test]
    fn tie_break_prefers_parsimony_then_small_k1() {
        let p = |k1, k2, total| SurfacePoint {
            k1,
            k2,
            mse: total,
            penalty: 0.0,
            total,
            step: 0,
        };
        let pts = [p(2, 2, 1.0), p(1, 3, 1.0), p(3, 1, 1.0), p(1, 4, 1.0)];
        let best = argmin(&pts).unwrap();
        assert_eq!((best.k1, best.k2), (1, 3));
        let pts = [p(2, 2, 0.5), p(1, 1, 0.6)];
        assert_eq!(argmin(&pts).unwrap().k1, 2);
    }

    #[test]
    fn empty_graph_selects_one_one() {
        let g = BipartiteGraph::new(8, 9, []).unwrap();
        let cfg = BcvConfig {
            folds: 3,
            ..Default::default()
        };
        let r = select(&g, &cfg).unwrap();
        assert_eq!((r.k1_hat, r.k2_hat), (1, 1));
        assert_eq!(r.lambda, 0.0);
        assert_eq!(r.trace.len(), 4);
    }
}
