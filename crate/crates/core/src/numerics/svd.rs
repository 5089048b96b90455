//! Rank-k truncated SVD.
//!
//! Small problems (min dimension up to `dense_cutoff`) go through an exact
//! dense SVD. Larger ones use randomized subspace iteration: a Gaussian sketch
//! with `oversample` extra columns, up to `power_iters` QR-stabilized power
//! iterations, stopping early once the leading k singular values change by
//! less than `tol` relatively.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{BcvError, Result};
use crate::rng::{task_rng, TAG_SVD};

/// A real matrix that can be multiplied against dense blocks.
pub trait MatrixOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn to_dense(&self) -> DMatrix<f64>;
    /// `self * x`
    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64>;
    /// `self^T * x`
    fn apply_t(&self, x: &DMatrix<f64>) -> DMatrix<f64>;
    fn all_finite(&self) -> bool;
}

impl MatrixOperator for DMatrix<f64> {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.clone()
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self * x
    }

    fn apply_t(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.tr_mul(x)
    }

    fn all_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SvdOptions {
    pub dense_cutoff: usize,
    pub oversample: usize,
    pub power_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            dense_cutoff: 512,
            oversample: 10,
            power_iters: 7,
            tol: 1e-8,
            seed: 0,
        }
    }
}

/// Leading `k` singular triplets. Columns of `u` are sign-normalized so that
/// their first nonzero entry is nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl TruncatedSvd {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// `U diag(sigma) V^T`, materialized.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (c, s) in self.sigma.iter().enumerate() {
            us.column_mut(c).scale_mut(*s);
        }
        us * self.v.transpose()
    }

    /// Keeps the leading `k` triplets.
    pub fn truncate(&self, k: usize) -> Self {
        let k = k.min(self.rank());
        Self {
            u: self.u.columns(0, k).into_owned(),
            sigma: self.sigma.rows(0, k).into_owned(),
            v: self.v.columns(0, k).into_owned(),
        }
    }

    /// Multiplies every singular value by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        self.sigma *= factor;
        self
    }
}

pub fn truncated_svd<M: MatrixOperator + ?Sized>(m: &M, k: usize, opts: &SvdOptions) -> Result<TruncatedSvd> {
    let (n1, n2) = (m.nrows(), m.ncols());
    let min_dim = n1.min(n2);
    if k == 0 || k > min_dim {
        return Err(BcvError::InvalidParameter(format!(
            "rank {k} outside 1..={min_dim} for a {n1}x{n2} matrix"
        )));
    }
    if !m.all_finite() {
        return Err(BcvError::NonFinite("svd input"));
    }
    let mut out = if min_dim <= opts.dense_cutoff {
        exact(&m.to_dense(), k)
    } else {
        randomized(m, k, opts)
    };
    normalize_signs(&mut out);
    Ok(out)
}

fn exact(m: &DMatrix<f64>, k: usize) -> TruncatedSvd {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    sorted_leading(&u, &svd.singular_values, &v_t, k)
}

fn sorted_leading(u: &DMatrix<f64>, s: &DVector<f64>, v_t: &DMatrix<f64>, k: usize) -> TruncatedSvd {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(a.cmp(&b)));
    order.truncate(k);
    TruncatedSvd {
        u: DMatrix::from_fn(u.nrows(), k, |r, c| u[(r, order[c])]),
        sigma: DVector::from_fn(k, |c, _| s[order[c]].max(0.0)),
        v: DMatrix::from_fn(v_t.ncols(), k, |r, c| v_t[(order[c], r)]),
    }
}

fn orthonormal_basis(y: DMatrix<f64>) -> DMatrix<f64> {
    y.qr().q()
}

fn randomized<M: MatrixOperator + ?Sized>(m: &M, k: usize, opts: &SvdOptions) -> TruncatedSvd {
    let (n1, n2) = (m.nrows(), m.ncols());
    let width = (k + opts.oversample).min(n1.min(n2));
    let mut rng = task_rng(opts.seed, &[TAG_SVD, k as u64]);
    let omega = DMatrix::from_fn(n2, width, |_, _| StandardNormal.sample(&mut rng));
    let mut q = orthonormal_basis(m.apply(&omega));

    // Projected problem: B^T = M^T Q (n2 x width); svd of B gives the answer.
    let project = |q: &DMatrix<f64>| -> (TruncatedSvd, DMatrix<f64>) {
        let bt = m.apply_t(q);
        let svd = bt.transpose().svd(true, true);
        let small = sorted_leading(
            &svd.u.expect("requested U"),
            &svd.singular_values,
            &svd.v_t.expect("requested V^T"),
            k,
        );
        (small, bt)
    };

    let (mut small, mut bt) = project(&q);
    for _ in 0..opts.power_iters {
        let z = orthonormal_basis(bt);
        q = orthonormal_basis(m.apply(&z));
        let (next, next_bt) = project(&q);
        let change = next
            .sigma
            .iter()
            .zip(small.sigma.iter())
            .map(|(a, b)| (a - b).abs() / a.abs().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        small = next;
        bt = next_bt;
        if change < opts.tol {
            break;
        }
    }
    TruncatedSvd {
        u: &q * &small.u,
        sigma: small.sigma,
        v: small.v,
    }
}

fn normalize_signs(svd: &mut TruncatedSvd) {
    for c in 0..svd.rank() {
        let scale = svd.u.column(c).amax();
        let first = svd
            .u
            .column(c)
            .iter()
            .copied()
            .find(|x| x.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE));
        if matches!(first, Some(x) if x < 0.0) {
            svd.u.column_mut(c).neg_mut();
            svd.v.column_mut(c).neg_mut();
        }
    }
}
