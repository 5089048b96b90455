use rand::Rng;
use rayon::prelude::*;

use crate::error::{BcvError, Result};
use crate::graph::{BipartiteGraph, LabelVector, Side};
use crate::rng::{task_rng, TAG_BRIM};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BimodularityOptions {
    /// Module counts 1..=max_modules are each tried.
    pub max_modules: usize,
    /// Random initialisations per module count.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for BimodularityOptions {
    fn default() -> Self {
        Self {
            max_modules: 25,
            restarts: 10,
            seed: 0,
        }
    }
}

/// Best co-clustering found. Module ids are shared between the two sides and
/// renumbered so that used modules are `0..modules`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bimodules {
    pub labels1: LabelVector,
    pub labels2: LabelVector,
    pub modularity: f64,
    pub modules: usize,
}

impl Bimodules {
    /// Number of distinct modules present on each side.
    pub fn side_counts(&self) -> (usize, usize) {
        (self.labels1.n_nonempty(), self.labels2.n_nonempty())
    }
}

/// Barber's bipartite modularity of a joint module assignment.
pub fn bimodularity(graph: &BipartiteGraph, g1: &[usize], g2: &[usize]) -> Result<f64> {
    if g1.len() != graph.n1() || g2.len() != graph.n2() {
        return Err(BcvError::DimensionMismatch("module assignment length".into()));
    }
    let m = graph.n_edges() as f64;
    if m == 0.0 {
        return Err(BcvError::EmptyGraph("bimodularity of a graph without edges".into()));
    }
    let c = g1.iter().chain(g2).max().map_or(0, |&x| x + 1);
    let mut d = vec![0.0; c];
    let mut e = vec![0.0; c];
    for (i, &g) in g1.iter().enumerate() {
        d[g] += graph.row_degree(i) as f64;
    }
    for (j, &g) in g2.iter().enumerate() {
        e[g] += graph.col_degree(j) as f64;
    }
    let inside = graph.edges().iter().filter(|&&(i, j)| g1[i] == g2[j]).count() as f64;
    let expected: f64 = d.iter().zip(&e).map(|(a, b)| a * b).sum::<f64>() / m;
    Ok((inside - expected) / m)
}

/// Given modules on the opposite side, assigns each node of one side to the
/// module maximising its bimodularity contribution (lowest id on ties).
fn best_response(
    c: usize,
    m: f64,
    neighbors: impl Fn(usize) -> Vec<usize>,
    degree: impl Fn(usize) -> f64,
    other: &[usize],
    other_mass: &[f64],
    out: &mut [usize],
) {
    let mut count = vec![0.0; c];
    for (u, slot) in out.iter_mut().enumerate() {
        count.iter_mut().for_each(|x| *x = 0.0);
        for v in neighbors(u) {
            count[other[v]] += 1.0;
        }
        let du = degree(u);
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for g in 0..c {
            let s = count[g] - du * other_mass[g] / m;
            if s > best_score {
                best = g;
                best_score = s;
            }
        }
        *slot = best;
    }
}

fn mass(labels: &[usize], c: usize, degree: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; c];
    for (u, &g) in labels.iter().enumerate() {
        out[g] += degree(u);
    }
    out
}

/// One BRIM run from a random assignment of the second side into `c` modules.
fn brim(graph: &BipartiteGraph, c: usize, seed: u64, restart: usize) -> Result<(Vec<usize>, Vec<usize>, f64)> {
    let mut rng = task_rng(seed, &[TAG_BRIM, c as u64, restart as u64]);
    let m = graph.n_edges() as f64;
    let row_deg = |i: usize| graph.row_degree(i) as f64;
    let col_deg = |j: usize| graph.col_degree(j) as f64;
    let row_nb = |i: usize| graph.row_edges(i).iter().map(|e| e.1).collect::<Vec<_>>();
    let col_nb = |j: usize| graph.col_neighbors(j).to_vec();

    let mut g2: Vec<usize> = (0..graph.n2()).map(|_| rng.random_range(0..c)).collect();
    let mut g1 = vec![0; graph.n1()];
    let mut q = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let e = mass(&g2, c, col_deg);
        best_response(c, m, row_nb, row_deg, &g2, &e, &mut g1);
        let d = mass(&g1, c, row_deg);
        best_response(c, m, col_nb, col_deg, &g1, &d, &mut g2);
        let next = bimodularity(graph, &g1, &g2)?;
        if next <= q + 1e-12 {
            q = q.max(next);
            break;
        }
        q = next;
    }
    Ok((g1, g2, q))
}

/// BRIM bimodularity maximisation swept over module counts, keeping the
/// assignment with the highest bimodularity (ties go to fewer modules, then to
/// the earlier restart).
pub fn bimodularity_communities(graph: &BipartiteGraph, opts: &BimodularityOptions) -> Result<Bimodules> {
    if opts.max_modules == 0 || opts.restarts == 0 {
        return Err(BcvError::InvalidParameter(
            "max_modules and restarts must be positive".into(),
        ));
    }
    if graph.n_edges() == 0 {
        return Err(BcvError::EmptyGraph("bimodularity of a graph without edges".into()));
    }
    let tasks: Vec<(usize, usize)> = (1..=opts.max_modules)
        .flat_map(|c| (0..opts.restarts).map(move |r| (c, r)))
        .collect();
    let mut runs = tasks
        .par_iter()
        .map(|&(c, r)| brim(graph, c, opts.seed, r))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (idx, run) in runs.iter().enumerate() {
        if run.2 > runs[best].2 {
            best = idx;
        }
    }
    let (g1, g2, q) = runs.swap_remove(best);
    let mut index = vec![usize::MAX; opts.max_modules];
    let mut next = 0;
    for &g in g1.iter().chain(&g2) {
        if index[g] == usize::MAX {
            index[g] = next;
            next += 1;
        }
    }
    let relabel = |v: Vec<usize>| v.into_iter().map(|g| index[g]).collect::<Vec<_>>();
    Ok(Bimodules {
        labels1: LabelVector::new(relabel(g1), next, Side::One)?,
        labels2: LabelVector::new(relabel(g2), next, Side::Two)?,
        modularity: q,
        modules: next,
    })
}
