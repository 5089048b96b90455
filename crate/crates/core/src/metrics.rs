//! Partition comparison and recovery tallies.

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::{Deserialize, Serialize};

use crate::bcv::SelectionResult;
use crate::error::{BcvError, Result};
use crate::graph::LabelVector;

const MAX_MATCHED_CLUSTERS: usize = 64;

fn dense_ids(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = std::collections::HashMap::new();
    let ids = labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (ids, map.len())
}

fn contingency(a: &[usize], b: &[usize]) -> (Vec<Vec<u64>>, usize, usize) {
    let (a, ka) = dense_ids(a);
    let (b, kb) = dense_ids(b);
    let mut table = vec![vec![0u64; kb]; ka];
    for (x, y) in a.iter().zip(&b) {
        table[*x][*y] += 1;
    }
    (table, ka, kb)
}

fn choose2(n: u64) -> f64 {
    (n as f64) * (n as f64 - 1.0) / 2.0
}

/// Adjusted Rand index of two labelings of the same nodes.
pub fn adjusted_rand_index(a: &LabelVector, b: &LabelVector) -> Result<f64> {
    ari_slices(a.as_slice(), b.as_slice())
}

pub(crate) fn ari_slices(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(BcvError::DimensionMismatch(format!(
            "label lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(BcvError::InvalidParameter(
            "adjusted Rand index needs at least 2 items".into(),
        ));
    }
    let (table, _, _) = contingency(a, b);
    let index: f64 = table.iter().flatten().map(|&n| choose2(n)).sum();
    let rows: f64 = table.iter().map(|r| choose2(r.iter().sum())).sum();
    let cols: f64 = (0..table[0].len())
        .map(|j| choose2(table.iter().map(|r| r[j]).sum()))
        .sum();
    let total = choose2(a.len() as u64);
    let expected = rows * cols / total;
    let max = 0.5 * (rows + cols);
    if max == expected {
        // Both partitions trivial in the same way (all singletons or one block).
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

/// Largest fraction of positions on which `a` and `b` agree after relabeling
/// `b` by a one-to-one map, found by optimal assignment on the confusion matrix.
pub fn label_agreement(a: &LabelVector, b: &LabelVector) -> Result<f64> {
    agreement_slices(a.as_slice(), b.as_slice())
}

pub(crate) fn agreement_slices(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(BcvError::DimensionMismatch(format!(
            "label lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Ok(1.0);
    }
    let (table, ka, kb) = contingency(a, b);
    let k = ka.max(kb);
    if k > MAX_MATCHED_CLUSTERS {
        return Err(BcvError::InvalidParameter(format!(
            "{k} clusters exceed the matching limit of {MAX_MATCHED_CLUSTERS}"
        )));
    }
    // Square, zero-padded weights.
    let weights = Matrix::from_fn(k, k, |(r, c)| if r < ka && c < kb { table[r][c] as i64 } else { 0 });
    let (matched, _) = kuhn_munkres(&weights);
    Ok(matched as f64 / a.len() as f64)
}

/// Per-side count of replications whose selected K matched the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryTally {
    pub reps: usize,
    pub hits1: usize,
    pub hits2: usize,
}

impl RecoveryTally {
    pub fn from_pairs(estimates: impl IntoIterator<Item = (usize, usize)>, truth: (usize, usize)) -> Self {
        let mut t = RecoveryTally {
            reps: 0,
            hits1: 0,
            hits2: 0,
        };
        for (k1, k2) in estimates {
            t.reps += 1;
            t.hits1 += usize::from(k1 == truth.0);
            t.hits2 += usize::from(k2 == truth.1);
        }
        t
    }

    pub fn rates(&self) -> (f64, f64) {
        if self.reps == 0 {
            return (0.0, 0.0);
        }
        (
            self.hits1 as f64 / self.reps as f64,
            self.hits2 as f64 / self.reps as f64,
        )
    }
}

pub fn tally_recovery(results: &[SelectionResult], truth: (usize, usize)) -> Result<RecoveryTally> {
    if results.is_empty() {
        return Err(BcvError::InvalidParameter("no results to tally".into()));
    }
    Ok(RecoveryTally::from_pairs(
        results.iter().map(|r| (r.k1_hat, r.k2_hat)),
        truth,
    ))
}
