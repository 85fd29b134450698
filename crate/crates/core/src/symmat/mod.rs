//! Dense symmetric and block matrix kernel.
//!
//! Every matrix inequality in the crate is assembled from the pieces here:
//! `He(M) = M + Mᵀ`, direct sums, and the symmetric eigendecomposition that
//! backs all definiteness tests.

mod dense;
mod eig;
mod sym;

pub use dense::Mat;
pub use eig::{sym_eig, SymEigen};
pub use sym::{block_diag, he, is_definite, BlockSpec, Definiteness, SymMatrix};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("{op}: incompatible dimensions {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not square: {0:?}")]
    NotSquare((usize, usize)),
    #[error("rows have differing lengths")]
    RaggedRows,
    #[error("block grid leaves a block row or column without a sized block")]
    UnderdeterminedBlocks,
    #[error("empty block list")]
    EmptyBlocks,
    #[error("matrix is not symmetric (relative asymmetry {0:.3e})")]
    Asymmetric(f64),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is singular")]
    Singular,
}
