//! Full counting statistics of charge transport for non-interacting fermions.
//!
//! The crate evaluates the counting determinant `χ(λ) = det D(λ)` and its
//! regularized form, recovers integer charge distributions from it, checks it
//! against a brute-force Fock-space computation, and measures the trace-ideal
//! norms that control the idealized (infinite lead, infinitely deep sea) limit.
//!
//! Module map:
//! - [`opcore`]: dense complex linear algebra.
//! - [`models`]: two-lead lattices, occupations, propagators, chiral models.
//! - [`engine`]: counting kernels, generating functions, distributions, cumulants.
//! - [`oracle`]: brute-force second quantization on the full Fock space.
//! - [`diagnostics`]: Schatten-norm reports and parameter scans.

pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod models;
pub mod opcore;
pub mod oracle;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, ErrorClass, Result};
