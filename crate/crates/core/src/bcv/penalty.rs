use log::warn;

use super::PenaltyForm;
use crate::error::{BcvError, Result};
use crate::graph::BipartiteGraph;

/// Edge density of the full bi-adjacency matrix.
pub fn empirical_density(graph: &BipartiteGraph) -> f64 {
    graph.density()
}

/// `lambda = C * rho^{3/2} / sqrt(min(n1, n2))` with `rho` the density of the full graph.
pub fn penalty_factor(graph: &BipartiteGraph, c: f64) -> Result<f64> {
    penalty_factor_with(graph, c, PenaltyForm::Geometric)
}

pub fn penalty_factor_with(graph: &BipartiteGraph, c: f64, form: PenaltyForm) -> Result<f64> {
    if !(c.is_finite() && c > 0.0) {
        return Err(BcvError::InvalidParameter(format!(
            "penalty constant {c} must be positive"
        )));
    }
    let rho = empirical_density(graph);
    if rho == 0.0 {
        warn!("graph has no edges; penalty factor is 0 and every candidate ties");
        return Ok(0.0);
    }
    let lambda = match form {
        PenaltyForm::Geometric => c * rho.powf(1.5) / (graph.n1().min(graph.n2()) as f64).sqrt(),
        PenaltyForm::RhoSquaredLog => {
            let n = graph.n1().max(graph.n2());
            if n < 2 {
                return Err(BcvError::InvalidParameter("log-penalty needs max(n1, n2) >= 2".into()));
            }
            c * rho * rho / (n as f64).ln().sqrt()
        }
    };
    Ok(lambda)
}
