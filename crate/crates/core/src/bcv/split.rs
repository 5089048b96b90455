use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BcvError, Result};
use crate::rng::{task_rng, TAG_SPLIT};

/// How node pairs are divided into training and evaluation sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SplitMode {
    /// `replications` independent splits, each pair trained on with probability `w`.
    Bernoulli { w: f64, replications: usize },
    /// One partition of all pairs into `folds` evaluation sets.
    KFold { folds: usize },
}

impl SplitMode {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SplitMode::Bernoulli { w, replications } => {
                if !(w > 0.0 && w < 1.0) {
                    return Err(BcvError::InvalidParameter(format!(
                        "training proportion {w} not in (0, 1)"
                    )));
                }
                if replications == 0 {
                    return Err(BcvError::InvalidParameter("need at least one replication".into()));
                }
            }
            SplitMode::KFold { folds } => {
                if folds < 2 {
                    return Err(BcvError::InvalidParameter(format!(
                        "need at least 2 folds, got {folds}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Training proportion used to rescale the completed matrix.
    pub fn train_fraction(&self) -> f64 {
        match *self {
            SplitMode::Bernoulli { w, .. } => w,
            SplitMode::KFold { folds } => 1.0 - 1.0 / folds as f64,
        }
    }

    pub fn replications(&self) -> usize {
        match *self {
            SplitMode::Bernoulli { replications, .. } => replications,
            SplitMode::KFold { folds } => folds,
        }
    }
}

/// Evaluation pairs for every replication, as sorted row-major pair indices
/// `i * n2 + j`. Everything not listed is training.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    n1: usize,
    n2: usize,
    w: f64,
    mode: Option<SplitMode>,
    eval: Vec<Vec<u64>>,
}

pub fn make_split(n1: usize, n2: usize, mode: SplitMode, seed: u64) -> Result<SplitPlan> {
    mode.validate()?;
    let n_pairs = n1 as u64 * n2 as u64;
    let eval = match mode {
        SplitMode::KFold { folds } => {
            if n_pairs < folds as u64 {
                return Err(BcvError::InvalidParameter(format!(
                    "{n_pairs} pairs cannot fill {folds} folds"
                )));
            }
            let mut order: Vec<u64> = (0..n_pairs).collect();
            order.shuffle(&mut task_rng(seed, &[TAG_SPLIT]));
            let base = n_pairs as usize / folds;
            let extra = n_pairs as usize % folds;
            let mut start = 0;
            (0..folds)
                .map(|f| {
                    let len = base + usize::from(f < extra);
                    let mut chunk = order[start..start + len].to_vec();
                    start += len;
                    chunk.sort_unstable();
                    chunk
                })
                .collect()
        }
        SplitMode::Bernoulli { w, replications } => (0..replications)
            .map(|s| {
                let mut rng = task_rng(seed, &[TAG_SPLIT, s as u64]);
                (0..n_pairs).filter(|_| rng.random::<f64>() >= w).collect()
            })
            .collect(),
    };
    Ok(SplitPlan {
        n1,
        n2,
        w: mode.train_fraction(),
        mode: Some(mode),
        eval,
    })
}

impl SplitPlan {
    /// A plan with hand-specified evaluation pairs, one set per replication.
    pub fn from_eval_sets(n1: usize, n2: usize, w: f64, sets: Vec<Vec<(usize, usize)>>) -> Result<Self> {
        if !(w > 0.0 && w <= 1.0) {
            return Err(BcvError::InvalidParameter(format!(
                "training proportion {w} not in (0, 1]"
            )));
        }
        let eval = sets
            .into_iter()
            .map(|set| {
                let mut idx = set
                    .into_iter()
                    .map(|(i, j)| {
                        if i >= n1 || j >= n2 {
                            Err(BcvError::DimensionMismatch(format!(
                                "pair ({i}, {j}) outside {n1}x{n2}"
                            )))
                        } else {
                            Ok(i as u64 * n2 as u64 + j as u64)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                idx.sort_unstable();
                idx.dedup();
                Ok(idx)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n1,
            n2,
            w,
            mode: None,
            eval,
        })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn mode(&self) -> Option<SplitMode> {
        self.mode
    }

    pub fn replications(&self) -> usize {
        self.eval.len()
    }

    /// Sorted evaluation pair indices of replication `s`.
    pub fn eval_pairs(&self, s: usize) -> &[u64] {
        &self.eval[s]
    }

    pub fn is_eval(&self, s: usize, i: usize, j: usize) -> bool {
        self.eval[s]
            .binary_search(&(i as u64 * self.n2 as u64 + j as u64))
            .is_ok()
    }

    pub fn decode(&self, pair: u64) -> (usize, usize) {
        ((pair / self.n2 as u64) as usize, (pair % self.n2 as u64) as usize)
    }
}
