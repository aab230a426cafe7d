// SPDX-License-Identifier: MIT OR Apache-2.0

//! Estimation and matrix primitives.

pub mod gaussian;
pub mod linalg;
pub mod spectral;

pub use gaussian::{
    entropy_of_covariance, estimate_gaussian, gaussian_entropy, GaussianEstimate, HALF_LOG_2PI_E,
};
pub use linalg::{cholesky, eigen_symmetric, log_det_psd, EigenSpectrum, Matrix};
pub use spectral::{marchenko_pastur_density, marchenko_pastur_support};
