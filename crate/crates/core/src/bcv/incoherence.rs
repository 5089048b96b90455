use nalgebra::{DMatrix, Matrix2};

use crate::error::{BcvError, Result};
use crate::graph::{LabelVector, SbmSpec};

/// Incoherence of the right singular vectors of `N1^{1/2} B N2^{1/2}`:
/// `beta = 1 - max over index pairs {a, b} of ||(V V^T - I)_{ab}||`, where the
/// norm is the spectral norm of the 2x2 principal submatrix. Diagnostic only.
pub fn incoherence_beta(spec: &SbmSpec, c1: &LabelVector, c2: &LabelVector) -> Result<f64> {
    let b = spec.block_matrix();
    let (k1, k2) = b.shape();
    if c1.k() != k1 || c2.k() != k2 {
        return Err(BcvError::DimensionMismatch(format!(
            "labels declare ({}, {}) communities for a {k1}x{k2} block matrix",
            c1.k(),
            c2.k()
        )));
    }
    let (n1k, n2k) = (c1.counts(), c2.counts());
    let b_bar = DMatrix::from_fn(k1, k2, |a, c| {
        (n1k[a] as f64).sqrt() * b[(a, c)] * (n2k[c] as f64).sqrt()
    });
    if b_bar.iter().all(|&v| v == 0.0) {
        return Err(BcvError::Degenerate("scaled block matrix is zero".into()));
    }
    let rank = k1.min(k2);
    let v_t = b_bar.svd(false, true).v_t.expect("requested V^T");
    let v = v_t.rows(0, rank).transpose();
    let gram = &v * v.transpose() - DMatrix::identity(k2, k2);

    let mut worst = 0.0f64;
    for a in 0..k2 {
        for c in a + 1..k2 {
            let sub = Matrix2::new(gram[(a, a)], gram[(a, c)], gram[(c, a)], gram[(c, c)]);
            let norm = sub.symmetric_eigenvalues().iter().fold(0.0f64, |m, e| m.max(e.abs()));
            worst = worst.max(norm);
        }
    }
    Ok(1.0 - worst)
}
