//! Embedded datasets.

use std::path::Path;

use super::{parse_edgelist, BipartiteGraph, EdgelistOptions};

/// Davis's Southern Women attendance data: 18 women by 14 events, one-indexed
/// `woman event` pairs.
pub const SOUTHERN_WOMEN_EDGELIST: &str = include_str!("../../data/southern_women.txt");

pub const SOUTHERN_WOMEN_NAMES: [&str; 18] = [
    "Evelyn Jefferson",
    "Laura Mandeville",
    "Theresa Anderson",
    "Brenda Rogers",
    "Charlotte McDowd",
    "Frances Anderson",
    "Eleanor Nye",
    "Pearl Oglethorpe",
    "Ruth DeSand",
    "Verne Sanderson",
    "Myra Liddel",
    "Katherina Rogers",
    "Sylvia Avondale",
    "Nora Fayette",
    "Helen Lloyd",
    "Dorothy Murchison",
    "Olivia Carleton",
    "Flora Price",
];

pub const SOUTHERN_WOMEN_EVENTS: [&str; 14] = [
    "E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8", "E9", "E10", "E11", "E12", "E13", "E14",
];

pub fn southern_women() -> BipartiteGraph {
    let opts = EdgelistOptions {
        one_indexed: true,
        delimiter: None,
        header: true,
    };
    parse_edgelist(SOUTHERN_WOMEN_EDGELIST, &opts, Path::new("southern_women.txt"))
        .expect("embedded dataset parses")
        .graph
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn southern_women_shape() {
        let g = southern_women();
        assert_eq!((g.n1(), g.n2()), (18, 14));
        assert_eq!(g.n_edges(), 89);
        // Evelyn attended every event of the first nine except E7.
        assert_eq!(g.row_degree(0), 8);
        assert!(!g.has_edge(0, 6));
        assert_eq!(g.col_degree(8), 12);
    }
}
