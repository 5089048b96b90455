use rand::seq::SliceRandom;

use super::projection::WeightedGraph;
use crate::error::{BcvError, Result};
use crate::graph::{LabelVector, Side};
use crate::rng::{task_rng, TAG_LOUVAIN};

/// Newman modularity (resolution 1) of a partition of a weighted graph.
pub fn modularity(graph: &WeightedGraph, labels: &[usize]) -> Result<f64> {
    if labels.len() != graph.n() {
        return Err(BcvError::DimensionMismatch(format!(
            "{} labels for {} nodes",
            labels.len(),
            graph.n()
        )));
    }
    let two_m = 2.0 * graph.total_weight();
    if two_m <= 0.0 {
        return Err(BcvError::Degenerate("graph has no weight".into()));
    }
    let k = labels.iter().max().map_or(0, |&x| x + 1);
    let mut tot = vec![0.0; k];
    let mut inside = 0.0;
    for u in 0..graph.n() {
        tot[labels[u]] += graph.strength(u);
        for &(v, w) in graph.neighbors(u) {
            if labels[u] == labels[v] {
                inside += w;
            }
        }
    }
    let expected: f64 = tot.iter().map(|t| t * t).sum::<f64>() / two_m;
    Ok((inside - expected) / two_m)
}

/// Level graph used while aggregating. `self_w[i]` is the weight of node i's
/// self-loop counted over ordered pairs.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_w: Vec<f64>,
}

impl Level {
    fn strength(&self, i: usize) -> f64 {
        self.self_w[i] + self.adj[i].iter().map(|e| e.1).sum::<f64>()
    }
}

/// Louvain multilevel modularity maximisation. Node visiting order at every
/// level is a permutation drawn from `seed`. The returned labels are numbered
/// by first appearance.
pub fn modularity_communities(graph: &WeightedGraph, seed: u64) -> Result<LabelVector> {
    let n = graph.n();
    let two_m = 2.0 * graph.total_weight();
    if two_m <= 0.0 {
        return Err(BcvError::Degenerate("projection has no edges".into()));
    }
    let mut rng = task_rng(seed, &[TAG_LOUVAIN]);
    let mut level = Level {
        adj: (0..n).map(|u| graph.neighbors(u).to_vec()).collect(),
        self_w: vec![0.0; n],
    };
    let mut assignment: Vec<usize> = (0..n).collect();

    loop {
        let m = level.adj.len();
        let k: Vec<f64> = (0..m).map(|i| level.strength(i)).collect();
        let mut comm: Vec<usize> = (0..m).collect();
        let mut tot = k.clone();
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut rng);

        let mut link = vec![0.0; m];
        let mut seen = vec![false; m];
        let mut touched: Vec<usize> = Vec::new();
        let mut any_move = false;
        loop {
            let mut moved = false;
            for &i in &order {
                let ci = comm[i];
                tot[ci] -= k[i];
                for &(j, w) in &level.adj[i] {
                    let c = comm[j];
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c);
                    }
                    link[c] += w;
                }
                let gain = |c: usize, link_c: f64| link_c - tot[c] * k[i] / two_m;
                let mut best = ci;
                let mut best_gain = gain(ci, link[ci]);
                for &c in &touched {
                    let g = gain(c, link[c]);
                    if g > best_gain {
                        best = c;
                        best_gain = g;
                    }
                }
                for &c in &touched {
                    link[c] = 0.0;
                    seen[c] = false;
                }
                touched.clear();
                tot[best] += k[i];
                if best != ci {
                    comm[i] = best;
                    moved = true;
                    any_move = true;
                }
            }
            if !moved {
                break;
            }
        }
        if !any_move {
            break;
        }

        let mut index = vec![usize::MAX; m];
        let mut next = 0;
        for &c in &comm {
            if index[c] == usize::MAX {
                index[c] = next;
                next += 1;
            }
        }
        for a in &mut assignment {
            *a = index[comm[*a]];
        }
        let mut self_w = vec![0.0; next];
        let mut rows: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); next];
        for i in 0..m {
            let ci = index[comm[i]];
            self_w[ci] += level.self_w[i];
            for &(j, w) in &level.adj[i] {
                let cj = index[comm[j]];
                if ci == cj {
                    self_w[ci] += w;
                } else {
                    *rows[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        level = Level {
            adj: rows.into_iter().map(|r| r.into_iter().collect()).collect(),
            self_w,
        };
        if next == m {
            break;
        }
    }
    Ok(LabelVector::from_labels(assignment, Side::One).renumbered())
}
