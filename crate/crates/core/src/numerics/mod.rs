//! Numeric kernels: sparse matrices, truncated SVD and k-means.

mod kmeans;
mod sparse;
mod svd;

pub use kmeans::{kmeans, KMeansOptions, KMeansResult};
pub use sparse::SparseMatrix;
pub use svd::{truncated_svd, MatrixOperator, SvdOptions, TruncatedSvd};
