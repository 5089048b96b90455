use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{BipartiteGraph, LabelVector, Side};
use crate::error::{BcvError, Result};
use crate::rng::{task_rng, TaskRng, TAG_SBM};

const LABEL_RETRIES: usize = 100;

/// How node labels are obtained when sampling from the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Membership {
    /// Fixed labels; lengths must equal the side sizes requested.
    Explicit { c1: Vec<usize>, c2: Vec<usize> },
    /// Independent categorical draws with the given community proportions.
    Multinomial { pi1: Vec<f64>, pi2: Vec<f64> },
}

/// A bipartite stochastic block model: the block probability matrix (already
/// scaled by the sparsity level) and the membership mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmSpec {
    b: DMatrix<f64>,
    membership: Membership,
}

impl SbmSpec {
    pub fn new(b: DMatrix<f64>, membership: Membership) -> Result<Self> {
        let (k1, k2) = b.shape();
        if k1 == 0 || k2 == 0 {
            return Err(BcvError::InvalidParameter("block matrix must be non-empty".into()));
        }
        if let Some(v) = b.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(BcvError::InvalidParameter(format!(
                "block probability {v} outside [0, 1]"
            )));
        }
        match &membership {
            Membership::Explicit { c1, c2 } => {
                if c1.iter().any(|&l| l >= k1) || c2.iter().any(|&l| l >= k2) {
                    return Err(BcvError::DimensionMismatch(format!(
                        "explicit labels exceed block dimensions {k1}x{k2}"
                    )));
                }
            }
            Membership::Multinomial { pi1, pi2 } => {
                check_proportions(pi1, k1)?;
                check_proportions(pi2, k2)?;
            }
        }
        Ok(Self { b, membership })
    }

    /// Block matrix `scale * b0`.
    pub fn scaled(b0: &DMatrix<f64>, scale: f64, membership: Membership) -> Result<Self> {
        Self::new(b0 * scale, membership)
    }

    pub fn k1(&self) -> usize {
        self.b.nrows()
    }

    pub fn k2(&self) -> usize {
        self.b.ncols()
    }

    pub fn block_matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn membership(&self) -> &Membership {
        &self.membership
    }
}

fn check_proportions(pi: &[f64], k: usize) -> Result<()> {
    if pi.len() != k {
        return Err(BcvError::DimensionMismatch(format!(
            "proportion vector has length {}, expected {k}",
            pi.len()
        )));
    }
    if pi.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(BcvError::InvalidParameter("proportions must be nonnegative".into()));
    }
    let total: f64 = pi.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(BcvError::InvalidParameter(format!("proportions sum to {total}, not 1")));
    }
    Ok(())
}

fn draw_labels(rng: &mut TaskRng, n: usize, pi: &[f64], side: Side) -> Result<LabelVector> {
    let dist = WeightedIndex::new(pi).map_err(|e| BcvError::InvalidParameter(e.to_string()))?;
    for _ in 0..LABEL_RETRIES {
        let labels: Vec<usize> = (0..n).map(|_| dist.sample(rng)).collect();
        let lv = LabelVector::new(labels, pi.len(), side)?;
        if lv.counts().iter().all(|&c| c > 0) {
            return Ok(lv);
        }
    }
    Err(BcvError::EmptyCommunity { retries: LABEL_RETRIES })
}

/// Samples a bi-adjacency matrix with independent Bernoulli(B[c1_i, c2_j])
/// entries. Output is a pure function of `(spec, n1, n2, seed)`.
pub fn generate_sbm(
    spec: &SbmSpec,
    n1: usize,
    n2: usize,
    seed: u64,
) -> Result<(BipartiteGraph, LabelVector, LabelVector)> {
    if n1 == 0 || n2 == 0 {
        return Err(BcvError::InvalidParameter("side sizes must be positive".into()));
    }
    let mut rng = task_rng(seed, &[TAG_SBM]);
    let (c1, c2) = match &spec.membership {
        Membership::Explicit { c1, c2 } => {
            if c1.len() != n1 || c2.len() != n2 {
                return Err(BcvError::DimensionMismatch(format!(
                    "explicit labels have lengths ({}, {}), requested ({n1}, {n2})",
                    c1.len(),
                    c2.len()
                )));
            }
            (
                LabelVector::new(c1.clone(), spec.k1(), Side::One)?,
                LabelVector::new(c2.clone(), spec.k2(), Side::Two)?,
            )
        }
        Membership::Multinomial { pi1, pi2 } => {
            let c1 = draw_labels(&mut rng, n1, pi1, Side::One)?;
            let c2 = draw_labels(&mut rng, n2, pi2, Side::Two)?;
            (c1, c2)
        }
    };

    let mut edges = Vec::new();
    for (i, &a) in c1.as_slice().iter().enumerate() {
        for (j, &b) in c2.as_slice().iter().enumerate() {
            let p = spec.b[(a, b)];
            if p > 0.0 && (p >= 1.0 || rng.random::<f64>() < p) {
                edges.push((i, j));
            }
        }
    }
    let graph = BipartiteGraph::new(n1, n2, edges)?;
    Ok((graph, c1, c2))
}

/// The mean matrix `P = Z1 B Z2^T`, i.e. `P_ij = B[c1_i, c2_j]`.
pub fn true_mean_matrix(spec: &SbmSpec, c1: &LabelVector, c2: &LabelVector) -> Result<DMatrix<f64>> {
    if c1.k() != spec.k1() || c2.k() != spec.k2() {
        return Err(BcvError::DimensionMismatch(format!(
            "labels declare ({}, {}) communities, block matrix is {}x{}",
            c1.k(),
            c2.k(),
            spec.k1(),
            spec.k2()
        )));
    }
    let (a, b) = (c1.as_slice(), c2.as_slice());
    Ok(DMatrix::from_fn(a.len(), b.len(), |i, j| spec.b[(a[i], b[j])]))
}
