// SPDX-License-Identifier: MIT OR Apache-2.0

use std::f64::consts::{E, PI};

use serde::Serialize;

use super::linalg::{log_det_psd, Matrix};
use crate::data::{ReturnMatrix, Span};
use crate::error::{CovsegError, Result};

/// Maximum-likelihood mean and covariance of one window of observations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussianEstimate {
    pub mean: Vec<f64>,
    pub covariance: Matrix,
    pub count: usize,
}

impl GaussianEstimate {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Window mean and 1/n covariance, centered on the window's own mean.
///
/// Two passes: mean first, then centered outer products. The result is
/// symmetrized to absorb accumulation drift.
pub fn estimate_gaussian(data: &ReturnMatrix, range: Span) -> Result<GaussianEstimate> {
    data.check_span(range)?;
    let m = data.dim();
    let n = range.len();
    let inv_n = 1.0 / n as f64;

    let mut mean = vec![0.0; m];
    for s in range.start..range.end {
        for (acc, v) in mean.iter_mut().zip(data.column(s)) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v *= inv_n);

    let mut cov = Matrix::zeros(m);
    let mut dev = vec![0.0; m];
    for s in range.start..range.end {
        for ((d, v), mu) in dev.iter_mut().zip(data.column(s)).zip(&mean) {
            *d = v - mu;
        }
        for i in 0..m {
            for j in 0..=i {
                cov[(i, j)] += dev[i] * dev[j];
            }
        }
    }
    for i in 0..m {
        for j in 0..=i {
            let v = cov[(i, j)] * inv_n;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    cov.symmetrize();
    Ok(GaussianEstimate {
        mean,
        covariance: cov,
        count: n,
    })
}

/// `½·log(2πe)`, the entropy of a unit-variance normal.
pub const HALF_LOG_2PI_E: f64 = 1.418_938_533_204_672_7;

/// Differential entropy `½·log((2πe)^M |C|)`.
pub fn gaussian_entropy(est: &GaussianEstimate) -> Result<f64> {
    entropy_of_covariance(&est.covariance)
}

pub fn entropy_of_covariance(cov: &Matrix) -> Result<f64> {
    let m = cov.dim();
    if m == 0 {
        return Err(CovsegError::InvalidData(
            "zero-dimensional covariance".into(),
        ));
    }
    let log_det = log_det_psd(cov)?;
    Ok(0.5 * m as f64 * (2.0 * PI * E).ln() + 0.5 * log_det)
}
