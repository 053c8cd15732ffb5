//! Dense and compressed-sparse kernels used by the convolution branches.
//!
//! All reductions run sequentially in a fixed order, so identical inputs
//! give bit-identical outputs.

mod dense;
mod sparse;

pub use dense::{concat_cols, dot, matmul, matmul_nt, matmul_tn, relu, softmax_rows, DenseMatrix};
pub use sparse::{spmm, SparseMatrix};
