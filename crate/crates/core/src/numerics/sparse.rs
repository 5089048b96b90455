use nalgebra::DMatrix;

use super::MatrixOperator;

/// Real matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from row-major sorted `(row, col, value)` triplets.
    ///
    /// # Panics
    /// If triplets are out of bounds or not sorted by row.
    pub fn from_sorted_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut last_row = 0;
        for (i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            assert!(i >= last_row, "triplets must be sorted by row");
            last_row = i;
            row_ptr[i + 1] += 1;
            cols.push(j);
            vals.push(v);
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }
}

impl MatrixOperator for SparseMatrix {
    fn nrows(&self) -> usize {
        self.nrows
    }

    fn ncols(&self) -> usize {
        self.ncols
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[p])] += self.vals[p];
            }
        }
        m
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.ncols);
        let mut out = DMatrix::zeros(self.nrows, x.ncols());
        for c in 0..x.ncols() {
            let xc = x.column(c);
            let mut oc = out.column_mut(c);
            for i in 0..self.nrows {
                let mut acc = 0.0;
                for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.vals[p] * xc[self.cols[p]];
                }
                oc[i] = acc;
            }
        }
        out
    }

    fn apply_t(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.nrows);
        let mut out = DMatrix::zeros(self.ncols, x.ncols());
        for c in 0..x.ncols() {
            let xc = x.column(c);
            let mut oc = out.column_mut(c);
            for i in 0..self.nrows {
                let xi = xc[i];
                if xi == 0.0 {
                    continue;
                }
                for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                    oc[self.cols[p]] += self.vals[p] * xi;
                }
            }
        }
        out
    }

    fn all_finite(&self) -> bool {
        self.vals.iter().all(|v| v.is_finite())
    }
}
