//! Numerical toolkit for interior transmission eigenvalues of 2-D periodic
//! media and their homogenized limits.
//!
//! The crate covers the full pipeline:
//!
//! 1. periodic coefficient fields `(A(y), n(y))` and their `x/ε` rescalings
//!    ([`coeffs`]),
//! 2. the periodic cell problem, effective tensor `A_h`, mean index `n_h`,
//!    Voigt–Reuss bounds and the first-order corrector ([`homogenize`]),
//! 3. transmission eigenvalues three ways: analytic Bessel determinant on
//!    disks, a two-field pencil on `X(D)` for `A ≠ I`, and a fourth-order
//!    mixed formulation with a `λ_j(τ) = τ` fixed-point search for `A = I`
//!    ([`te`]), plus log–log convergence-rate fitting,
//! 4. far-field synthesis for penetrable disks, the regularized far-field
//!    equation, and eigenvalue detection as norm spikes ([`scatter`]),
//! 5. inversion of the first eigenvalue for effective material properties
//!    ([`recon`]).

pub mod coeffs;
pub mod error;
pub mod fem;
pub mod homogenize;
pub mod linalg;
pub mod mesh;
pub mod recon;
pub mod scatter;
pub mod specfun;
pub mod te;

pub use error::{Error, Result};
