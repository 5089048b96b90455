//! Joint selection of the number of communities on both sides of a bipartite
//! network by bipartite cross-validation, with comparison baselines, partition
//! metrics and a simulation harness.

pub mod baselines;
pub mod bcv;
pub mod error;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod numerics;
pub mod rng;

pub use bcv::{select, BcvConfig, SelectionResult, SurfacePoint};
pub use error::{BcvError, Result};
pub use graph::{generate_sbm, BipartiteGraph, LabelVector, Membership, SbmSpec, Side};
pub use metrics::{adjusted_rand_index, label_agreement, RecoveryTally};
