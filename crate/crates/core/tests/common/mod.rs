//! Reference implementations used as oracles. They are deliberately naive and
//! share no code with the library.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bcv_core::bcv::{candidate_loss, make_split, penalty_factor, BcvConfig, DRule};
use bcv_core::graph::{BipartiteGraph, LabelVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One-sided Jacobi SVD. Returns `(U, sigma, V)` with singular values in
/// decreasing order; `U` is `m x n`, `V` is `n x n` (thin, for `m >= n`).
pub fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    if a.nrows() < a.ncols() {
        let (u, s, v) = jacobi_svd(&a.transpose());
        return (v, s, u);
    }
    let (m, n) = a.shape();
    let mut u = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..m {
                    alpha += u[(i, p)] * u[(i, p)];
                    beta += u[(i, q)] * u[(i, q)];
                    gamma += u[(i, p)] * u[(i, q)];
                }
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = c * x - s * y;
                    u[(i, q)] = s * x + c * y;
                }
                for i in 0..n {
                    let (x, y) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * x - s * y;
                    v[(i, q)] = s * x + c * y;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut sigma: Vec<(f64, usize)> = (0..n)
        .map(|j| ((0..m).map(|i| u[(i, j)] * u[(i, j)]).sum::<f64>().sqrt(), j))
        .collect();
    sigma.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut uu = DMatrix::zeros(m, n);
    let mut vv = DMatrix::zeros(n, n);
    for (dst, &(s, src)) in sigma.iter().enumerate() {
        for i in 0..m {
            uu[(i, dst)] = if s > 0.0 { u[(i, src)] / s } else { 0.0 };
        }
        for i in 0..n {
            vv[(i, dst)] = v[(i, src)];
        }
    }
    (uu, sigma.into_iter().map(|x| x.0).collect(), vv)
}

/// Minimum k-means objective over every assignment of the points to at most
/// `k` clusters.
pub fn exhaustive_kmeans(points: &[Vec<f64>], k: usize) -> f64 {
    let m = points.len();
    let d = points[0].len();
    let mut best = f64::INFINITY;
    let mut assign = vec![0usize; m];
    loop {
        let mut obj = 0.0;
        for c in 0..k {
            let members: Vec<&Vec<f64>> = (0..m).filter(|&i| assign[i] == c).map(|i| &points[i]).collect();
            if members.is_empty() {
                continue;
            }
            for t in 0..d {
                let mean = members.iter().map(|p| p[t]).sum::<f64>() / members.len() as f64;
                obj += members.iter().map(|p| (p[t] - mean).powi(2)).sum::<f64>();
            }
        }
        best = best.min(obj);
        // Odometer increment.
        let mut i = 0;
        loop {
            if i == m {
                return best;
            }
            assign[i] += 1;
            if assign[i] < k {
                break;
            }
            assign[i] = 0;
            i += 1;
        }
    }
}

/// Adjusted Rand index from explicit pair counting.
pub fn brute_ari(a: &[usize], b: &[usize]) -> f64 {
    let (mut n11, mut n10, mut n01, mut n00) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    let denom: f64 = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
    if denom == 0.0 {
        1.0
    } else {
        2.0 * (n00 * n11 - n01 * n10) / denom
    }
}

fn permutations(items: Vec<usize>) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.clone();
        let head = rest.remove(i);
        for mut p in permutations(rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Best fraction of matching labels over every one-to-one relabeling.
pub fn brute_agreement(a: &[usize], b: &[usize]) -> f64 {
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let k = ka.max(kb);
    permutations((0..k).collect())
        .into_iter()
        .map(|p| a.iter().zip(b).filter(|(x, y)| p[**x] == **y).count())
        .max()
        .unwrap() as f64
        / a.len() as f64
}

pub fn random_labels(rng: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

pub fn random_graph(rng: &mut impl Rng, n1: usize, n2: usize) -> BipartiteGraph {
    let p: f64 = rng.random_range(0.15..0.6);
    let split1 = rng.random_range(1..n1);
    let split2 = rng.random_range(1..n2);
    let mut edges = Vec::new();
    for i in 0..n1 {
        for j in 0..n2 {
            let boost = if (i < split1) == (j < split2) { 0.3 } else { 0.0 };
            if rng.random::<f64>() < (p + boost).min(1.0) {
                edges.push((i, j));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 0));
    }
    BipartiteGraph::new(n1, n2, edges).unwrap()
}

/// Evaluates every candidate of `[1, m] x [1, m]` independently with
/// `candidate_loss` and returns the surface and its argmin (lowest total, then
/// smallest `K1 * K2`, then smallest `K1`).
pub type Surface = Vec<(usize, usize, f64)>;

pub fn exhaustive_grid(graph: &BipartiteGraph, cfg: &BcvConfig, m: usize) -> (Surface, (usize, usize)) {
    let lambda = penalty_factor(graph, cfg.c).unwrap();
    let plan = make_split(graph.n1(), graph.n2(), cfg.split_mode(), cfg.seed).unwrap();
    let reps = plan.replications();
    let mut surface = Vec::new();
    for k1 in 1..=m {
        for k2 in 1..=m {
            let mut sum = 0.0;
            for s in 0..reps {
                let fit =
                    candidate_loss(graph, &plan, s, k1, k2, lambda, &DRule::Product, cfg.restarts, cfg.seed).unwrap();
                sum += fit.test_mse;
            }
            let mse = sum / reps as f64;
            surface.push((k1, k2, mse + (k1 * k2) as f64 * lambda));
        }
    }
    let best = surface
        .iter()
        .min_by(|a, b| (a.2, a.0 * a.1, a.0).partial_cmp(&(b.2, b.0 * b.1, b.0)).unwrap())
        .map(|x| (x.0, x.1))
        .unwrap();
    (surface, best)
}

/// `Z_bar U Sigma (Z_bar V)^T` from the balanced block factorization, computed
/// with the Jacobi oracle.
pub fn factorized_mean(b: &DMatrix<f64>, c1: &LabelVector, c2: &LabelVector) -> DMatrix<f64> {
    let n1 = c1.counts();
    let n2 = c2.counts();
    let (k1, k2) = b.shape();
    let b_bar = DMatrix::from_fn(k1, k2, |i, j| (n1[i] as f64).sqrt() * b[(i, j)] * (n2[j] as f64).sqrt());
    let (u, s, v) = jacobi_svd(&b_bar);
    let r = s.len();
    let zbar = |labels: &LabelVector, counts: &[usize]| {
        DMatrix::from_fn(labels.len(), counts.len(), |i, k| {
            if labels.as_slice()[i] == k {
                1.0 / (counts[k] as f64).sqrt()
            } else {
                0.0
            }
        })
    };
    let left = zbar(c1, &n1) * u.columns(0, r);
    let right = zbar(c2, &n2) * v.columns(0, r);
    left * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s)) * right.transpose()
}
pub mod suite;
