//! Flatness diagnostics for analytic trigonometric polynomials with
//! non-negative coefficients.
//!
//! The crate computes the covariance quantities of `|P|^2` (`L`, `A`, `B`,
//! `r`, `C`) exactly for uniform-weight polynomials and in floating point
//! otherwise, screens families against the necessary condition
//! `C_j / m_j^2 -> infinity` for a.e. flatness, builds the standard families
//! and difference covers, and runs a Monte-Carlo flatness experiment.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod families;
pub mod montecarlo;
pub mod riesz;
pub mod scalar;
pub mod spectrum;

pub use diagnostics::{compute_report, covariance_matrix, DiagnosticsReport};
pub use error::{FlatError, Result};
pub use scalar::{ArithmeticMode, Scalar};
pub use spectrum::{autocorrelate, AnalyticPolynomial, SpectralData};
