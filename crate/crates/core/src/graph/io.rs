use std::fs;
use std::path::Path;

use log::warn;

use super::BipartiteGraph;
use crate::error::{BcvError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgelistOptions {
    /// Indices in the file start at 1.
    pub one_indexed: bool,
    /// Token separator; `None` splits on any whitespace.
    pub delimiter: Option<char>,
    /// The first non-comment line holds the side sizes `n1 n2` instead of an edge.
    pub header: bool,
}

impl Default for EdgelistOptions {
    fn default() -> Self {
        Self {
            one_indexed: true,
            delimiter: None,
            header: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub graph: BipartiteGraph,
    /// Repeated edges dropped while building the graph.
    pub duplicates: usize,
}

pub fn ingest_edgelist(path: impl AsRef<Path>, opts: &EdgelistOptions) -> Result<Ingested> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_edgelist(&text, opts, path)
}

/// Parses edgelist text. `origin` is only used in error messages.
pub fn parse_edgelist(text: &str, opts: &EdgelistOptions, origin: &Path) -> Result<Ingested> {
    let parse_err = |line: usize, msg: String| BcvError::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut dims: Option<(usize, usize)> = None;
    let mut expect_header = opts.header;
    let mut edges = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = match opts.delimiter {
            Some(d) => line.split(d).map(str::trim).filter(|t| !t.is_empty()).collect(),
            None => line.split_whitespace().collect(),
        };
        if tokens.len() != 2 {
            return Err(parse_err(lineno, format!("expected 2 fields, found {}", tokens.len())));
        }
        let mut vals = [0i64; 2];
        for (v, tok) in vals.iter_mut().zip(&tokens) {
            *v = tok
                .parse()
                .map_err(|_| parse_err(lineno, format!("`{tok}` is not an integer")))?;
        }
        if expect_header {
            expect_header = false;
            if vals.iter().any(|&v| v <= 0) {
                return Err(parse_err(lineno, "header sizes must be positive".into()));
            }
            dims = Some((vals[0] as usize, vals[1] as usize));
            continue;
        }
        let offset = i64::from(opts.one_indexed);
        if vals.iter().any(|&v| v < offset) {
            return Err(parse_err(
                lineno,
                format!("index below {offset} in a {}-indexed file", offset),
            ));
        }
        edges.push(((vals[0] - offset) as usize, (vals[1] - offset) as usize));
    }

    let (n1, n2) = match dims {
        Some(d) => d,
        None => {
            let n1 = edges.iter().map(|e| e.0 + 1).max().unwrap_or(0);
            let n2 = edges.iter().map(|e| e.1 + 1).max().unwrap_or(0);
            (n1, n2)
        }
    };
    if n1 == 0 || n2 == 0 {
        return Err(BcvError::EmptyGraph(format!("{} contains no edges", origin.display())));
    }
    let (graph, duplicates) = BipartiteGraph::new_dedup(n1, n2, edges)?;
    if duplicates > 0 {
        warn!("{}: dropped {duplicates} duplicate edges", origin.display());
    }
    Ok(Ingested { graph, duplicates })
}
