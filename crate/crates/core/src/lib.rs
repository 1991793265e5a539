//! Eigenvalue estimation for non-normal matrices by adaptive complex-plane
//! search driven by smallest-singular-value queries.
//!
//! The search only ever asks one question of the matrix: how small is the
//! smallest singular value of `A - mu I` at a shift `mu`? Everything else
//! (annulus search for extreme eigenvalues, eigenvector extraction,
//! pseudospectra) is built on that query, answered by [`oracle::SigmaOracle`]
//! either exactly or through a noise model.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigensolver;
pub mod error;
pub mod extreme;
pub mod linalg;
pub mod matgen;
pub mod oracle;
pub mod polyapprox;
pub mod pseudospectra;
pub mod roots;

pub use error::{Error, ErrorCategory, Result, SearchTrace};
pub use linalg::{ComplexMatrix, ComplexVector};
pub use num_complex::Complex64;
