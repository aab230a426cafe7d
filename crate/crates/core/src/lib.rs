// SPDX-License-Identifier: MIT OR Apache-2.0

//! Segmentation of multivariate time series into locally stationary Gaussian
//! regimes.
//!
//! A segment is split at the column `t*` that maximizes the log-likelihood
//! gain Δ(t) of fitting two Gaussians instead of one,
//!
//! ```text
//! Δ(t) = (n/2)·log|Ĉ| − (t/2)·log|Ĉ_L| − ((n−t)/2)·log|Ĉ_R|,
//! ```
//!
//! with maximum-likelihood covariances over the whole window and its two
//! halves. Δ(t)/n is the Jensen–Shannon divergence between the two fitted
//! Gaussians. Splitting recurses while the best gain reaches a threshold Δ₀
//! (10·M by default), and each terminal segment reports its Gaussian entropy
//! and covariance spectrum.
//!
//! Modules:
//! - [`kernels`]: estimators, Cholesky log-determinant, symmetric eigensolver,
//!   entropy and the Marčenko–Pastur density.
//! - [`segment`]: Δ spectra, the likelihood reference, recursive bisection.
//! - [`synth`]: seeded Gaussian-mixture generator and scenario files.
//! - [`ingest`]: delimited rate files to aligned log-returns.
//! - [`report`]: tables and documents written by the `covseg` command.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod ingest;
pub mod kernels;
pub mod report;
pub mod segment;
pub mod synth;

pub use data::{ReturnMatrix, Span, Timestamp};
pub use error::{CovsegError, Result};
