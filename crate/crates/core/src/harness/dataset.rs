use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;

use super::export::emit_heatmap;
use crate::bcv::{fit_full, select, write_surface_csv, BcvConfig, SelectionResult};
use crate::error::{BcvError, Result};
use crate::graph::{ingest_edgelist, southern_women, BipartiteGraph, EdgelistOptions, LabelVector};
use crate::metrics::ari_slices;

pub const BUILTIN_DATASETS: [&str; 1] = ["southern-women"];

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Builtin(String),
    Edgelist(PathBuf, EdgelistOptions),
}

impl DatasetSource {
    /// A builtin id if `name` is one, otherwise a path read with `opts`.
    pub fn parse(name: &str, opts: EdgelistOptions) -> Self {
        if BUILTIN_DATASETS.contains(&name) {
            DatasetSource::Builtin(name.to_string())
        } else {
            DatasetSource::Edgelist(PathBuf::from(name), opts)
        }
    }

    pub fn load(&self) -> Result<BipartiteGraph> {
        match self {
            DatasetSource::Builtin(id) if id == "southern-women" => Ok(southern_women()),
            DatasetSource::Builtin(id) => Err(BcvError::UnknownSetting(id.clone())),
            DatasetSource::Edgelist(path, opts) => Ok(ingest_edgelist(path, opts)?.graph),
        }
    }
}

/// Metadata comparison for side-one nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetadataReport {
    pub column: String,
    pub matched_nodes: usize,
    pub ari: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetReport {
    pub result: SelectionResult,
    pub labels1: LabelVector,
    pub labels2: LabelVector,
    pub b_hat: DMatrix<f64>,
    pub metadata: Option<MetadataReport>,
}

/// Reads a `id,<class>` CSV for side-one nodes. Ids use the same indexing as
/// the edgelist. Returns the class per node, `None` where absent.
pub fn read_metadata(path: &Path, n1: usize, one_indexed: bool) -> Result<(String, Vec<Option<String>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.len() < 2 {
        return Err(BcvError::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: "expected header `id,<class>`".into(),
        });
    }
    let column = headers[1].to_string();
    let mut classes = vec![None; n1];
    for (row, record) in r.records().enumerate() {
        let record = record?;
        let line = row + 2;
        let parse_err = |msg: String| BcvError::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let id: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad id `{}`", &record[0])))?;
        let idx = if one_indexed {
            id.checked_sub(1)
                .ok_or_else(|| parse_err("id 0 in one-indexed file".into()))?
        } else {
            id
        };
        if idx >= n1 {
            return Err(parse_err(format!("id {id} outside the {n1} side-one nodes")));
        }
        classes[idx] = Some(record[1].trim().to_string());
    }
    Ok((column, classes))
}

fn metadata_ari(labels: &LabelVector, column: String, classes: &[Option<String>]) -> Result<MetadataReport> {
    let mut ids = HashMap::new();
    let mut est = Vec::new();
    let mut meta = Vec::new();
    for (i, class) in classes.iter().enumerate() {
        if let Some(c) = class {
            let next = ids.len();
            meta.push(*ids.entry(c.clone()).or_insert(next));
            est.push(labels.as_slice()[i]);
        }
    }
    Ok(MetadataReport {
        column,
        matched_nodes: est.len(),
        ari: ari_slices(&est, &meta)?,
    })
}

/// Runs selection on a dataset, refits labels at the selected pair on the
/// full matrix and, if metadata is given, scores side-one labels against it.
pub fn run_dataset(graph: &BipartiteGraph, cfg: &BcvConfig, metadata: Option<(&Path, bool)>) -> Result<DatasetReport> {
    let result = select(graph, cfg)?;
    let (labels1, labels2, b_hat) = fit_full(graph, result.k1_hat, result.k2_hat, cfg)?;
    let metadata = match metadata {
        Some((path, one_indexed)) => {
            let (column, classes) = read_metadata(path, graph.n1(), one_indexed)?;
            Some(metadata_ari(&labels1, column, &classes)?)
        }
        None => None,
    };
    Ok(DatasetReport {
        result,
        labels1,
        labels2,
        b_hat,
        metadata,
    })
}

#[derive(Serialize)]
struct LabelRow {
    side: u8,
    node: usize,
    label: usize,
}

/// Writes `surface.csv`, `heatmap.csv` (+ slice), `labels.csv` and
/// `selection.json` into `dir`.
pub fn write_dataset_outputs(report: &DatasetReport, cfg: &BcvConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_surface_csv(&report.result, dir.join("surface.csv"))?;
    emit_heatmap(&report.result, dir.join("heatmap.csv"), None)?;
    let mut w = csv::Writer::from_path(dir.join("labels.csv"))?;
    for (side, labels) in [(1u8, &report.labels1), (2, &report.labels2)] {
        for (node, &label) in labels.as_slice().iter().enumerate() {
            w.serialize(LabelRow { side, node, label })?;
        }
    }
    w.flush()?;
    let b: Vec<Vec<f64>> = report.b_hat.row_iter().map(|r| r.iter().copied().collect()).collect();
    let json = serde_json::json!({
        "k1_hat": report.result.k1_hat,
        "k2_hat": report.result.k2_hat,
        "lambda": report.result.lambda,
        "rho_hat": report.result.rho_hat,
        "b_hat": b,
        "metadata": report.metadata,
        "trace": report.result.trace,
        "config": cfg,
    });
    fs::write(dir.join("selection.json"), serde_json::to_string_pretty(&json)?)?;
    Ok(())
}
