//! Penalized bipartite cross-validation for choosing `(K1, K2)`.
//!
//! Each replication hides a set of node pairs, completes the remaining
//! observations with a rank-`min(K1', K2')` truncated SVD scaled by `1/w`,
//! clusters the singular vectors of each side with k-means, estimates the
//! block probabilities from the training pairs and scores the held-out pairs.
//! The held-out squared error plus `d(K1', K2') * lambda` is averaged over
//! replications and minimized over a frontier search of candidate pairs.

mod blocks;
mod completion;
mod config;
mod incoherence;
mod penalty;
mod select;
mod split;

pub use blocks::{candidate_loss, estimate_blocks, score_labels, CandidateFit};
pub use completion::{complete_matrix, estimate_labels, observed_matrix, Observation};
pub use config::{BcvConfig, DRule, PenaltyForm, SplitKind};
pub use incoherence::incoherence_beta;
pub use penalty::{empirical_density, penalty_factor, penalty_factor_with};
pub use select::{fit_full, read_surface_csv, select, write_surface_csv, FrontierStep, SelectionResult, SurfacePoint};
pub use split::{make_split, SplitMode, SplitPlan};
