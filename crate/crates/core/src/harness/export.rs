use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bcv::SelectionResult;
use crate::error::{BcvError, Result};

/// One cell of the loss heatmap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatmapRow {
    #[serde(rename = "K1")]
    pub k1: usize,
    #[serde(rename = "K2")]
    pub k2: usize,
    pub total: f64,
    pub mse: f64,
    pub penalty: f64,
}

fn rows(result: &SelectionResult, k1: Option<usize>) -> Vec<HeatmapRow> {
    result
        .surface
        .iter()
        .filter(|p| k1.is_none_or(|k| p.k1 == k))
        .map(|p| HeatmapRow {
            k1: p.k1,
            k2: p.k2,
            total: p.total,
            mse: p.mse,
            penalty: p.penalty,
        })
        .collect()
}

fn write_rows(rows: &[HeatmapRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Path of the slice file written next to `path`: `<stem>_k1_<K1>.csv`.
pub fn slice_path(path: &Path, k1: usize) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("surface");
    path.with_file_name(format!("{stem}_k1_{k1}.csv"))
}

/// Writes the loss surface in long format (`K1,K2,total,mse,penalty`) to
/// `path`, plus the row of the surface at `slice_k1` (the selected `K1` when
/// `None`). Returns the slice file path.
pub fn emit_heatmap(result: &SelectionResult, path: impl AsRef<Path>, slice_k1: Option<usize>) -> Result<PathBuf> {
    let path = path.as_ref();
    if result.surface.is_empty() {
        return Err(BcvError::InvalidParameter("empty loss surface".into()));
    }
    write_rows(&rows(result, None), path)?;
    let k1 = slice_k1.unwrap_or(result.k1_hat);
    let slice = slice_path(path, k1);
    write_rows(&rows(result, Some(k1)), &slice)?;
    Ok(slice)
}

pub fn read_heatmap(path: impl AsRef<Path>) -> Result<Vec<HeatmapRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<HeatmapRow>, _>>()?)
}
