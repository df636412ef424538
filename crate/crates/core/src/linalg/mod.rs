//! Sparse and small-dense linear algebra: compressed sparse matrices, a
//! direct LU solver, sparse Cholesky with reusable symbolic analysis,
//! shift-invert Arnoldi for generalized pencils, and a dense complex SVD.

pub mod arnoldi;
pub mod cholesky;
pub mod lu;
pub mod ordering;
pub mod sparse;
pub mod svd;

pub use arnoldi::{eig_shift_invert, eig_shift_invert_opts, EigenResult, ShiftInvertOptions};
pub use cholesky::{CholeskyFactor, CholeskySymbolic};
pub use lu::{solve_direct, SparseLu};
pub use sparse::{PatternCombination, SparseMatrix, TripletBuilder};
pub use svd::{svd_dense, DenseComplex, DenseSVD};
