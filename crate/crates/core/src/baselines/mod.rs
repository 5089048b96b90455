//! Comparison methods: one-mode projection with modularity clustering, and
//! bipartite modularity (bimodularity) co-clustering.

mod bimodularity;
mod louvain;
mod projection;

pub use bimodularity::{bimodularity, bimodularity_communities, BimodularityOptions, Bimodules};
pub use louvain::{modularity, modularity_communities};
pub use projection::{project, WeightedGraph};

use crate::error::Result;
use crate::graph::{BipartiteGraph, Side};

/// Community counts from projecting onto each side and running modularity
/// clustering on each projection.
pub fn projection_counts(graph: &BipartiteGraph, seed: u64) -> Result<(usize, usize)> {
    let c1 = modularity_communities(&project(graph, Side::One), seed)?;
    let c2 = modularity_communities(&project(graph, Side::Two), seed)?;
    Ok((c1.n_nonempty(), c2.n_nonempty()))
}
