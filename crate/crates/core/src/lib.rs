//! Column subset selection by column-pivoted QR.
//!
//! The crate provides a reference Golub-Businger CPQR ([`gb_qr`]), the
//! collect-commit-expand variant ([`cceqr()`]) that reaches the same GB(k)
//! form while applying reflectors to only a small tracked subset of columns,
//! generators for structured test matrices, and verification helpers.
//!
//! All matrices are real, double precision and column-major. Permutation
//! vectors are 0-based: `p[j]` is the column of `A` that lands in position
//! `j`, so `A Π = A(:, p)`.

pub mod cceqr;
pub mod dense;
pub mod diagnostics;
pub mod error;
mod kernels;
pub mod matrixgen;
pub mod pivoted_qr;

pub use crate::cceqr::{cceqr, CceqrState, CollectOutput, SelectionResult, DEFAULT_RHO};
pub use crate::dense::{CompactWY, DenseMatrix, HouseholderSet};
pub use crate::error::{Error, Result};
pub use crate::pivoted_qr::{check_gb_form, gb_qr, gb_qr_naive, GbCheck, GbFactorization};
