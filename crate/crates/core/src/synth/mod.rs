// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded Gaussian-mixture series with known change points.

mod rng;
mod scenario;

use crate::data::{default_labels, index_timestamps, ReturnMatrix};
use crate::error::{CovsegError, Result};
use crate::kernels::{cholesky, Matrix};

pub use rng::{standard_normal_stream, StandardNormalStream};
pub use scenario::{load_scenario, parse_scenario, ScenarioFile};

/// One stationary block: `length` i.i.d. draws from N(mean, covariance).
#[derive(Clone, Debug, PartialEq)]
pub struct RegimeSpec {
    pub length: usize,
    pub mean: Vec<f64>,
    pub covariance: Matrix,
}

impl RegimeSpec {
    pub fn new(length: usize, mean: Vec<f64>, covariance: Matrix) -> Self {
        Self {
            length,
            mean,
            covariance,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixtureScenario {
    pub regimes: Vec<RegimeSpec>,
    pub seed: u64,
}

impl MixtureScenario {
    pub fn dim(&self) -> usize {
        self.regimes.first().map_or(0, |r| r.mean.len())
    }

    pub fn total_len(&self) -> usize {
        self.regimes.iter().map(|r| r.length).sum()
    }

    /// Start column of every regime after the first.
    pub fn boundaries(&self) -> Vec<usize> {
        self.regimes
            .iter()
            .scan(0, |acc, r| {
                *acc += r.length;
                Some(*acc)
            })
            .take(self.regimes.len().saturating_sub(1))
            .collect()
    }

    fn validate(&self) -> Result<Vec<Matrix>> {
        let m = self.dim();
        if self.regimes.is_empty() || m == 0 {
            return Err(CovsegError::InvalidConfig(
                "scenario needs at least one regime of dimension >= 1".into(),
            ));
        }
        if self.total_len() < 2 {
            return Err(CovsegError::InvalidConfig(
                "scenario must produce at least 2 observations".into(),
            ));
        }
        self.regimes
            .iter()
            .enumerate()
            .map(|(k, r)| {
                if r.length == 0 {
                    return Err(CovsegError::InvalidConfig(format!(
                        "regime {} has length 0",
                        k + 1
                    )));
                }
                if r.mean.len() != m || r.covariance.dim() != m {
                    return Err(CovsegError::DimensionMismatch {
                        expected: m,
                        got: if r.mean.len() != m {
                            r.mean.len()
                        } else {
                            r.covariance.dim()
                        },
                    });
                }
                let asym = (0..m)
                    .flat_map(|i| (0..i).map(move |j| (i, j)))
                    .any(|(i, j)| (r.covariance[(i, j)] - r.covariance[(j, i)]).abs() > 1e-12);
                if asym {
                    return Err(CovsegError::NotPositiveDefinite(format!(
                        "regime {} covariance is not symmetric",
                        k + 1
                    )));
                }
                cholesky(&r.covariance).map_err(|_| {
                    CovsegError::NotPositiveDefinite(format!("regime {} covariance", k + 1))
                })
            })
            .collect()
    }
}

/// Draws the scenario: column `s` of regime `j` is `μ_j + L_j·z_s`, with
/// `L_j` the lower Cholesky factor of `C_j` and `z_s` taken in order from
/// one [`StandardNormalStream`] seeded with `scenario.seed`.
///
/// Returns the matrix and the true boundaries (regime start columns, excluding 0).
pub fn sample_scenario(scenario: &MixtureScenario) -> Result<(ReturnMatrix, Vec<usize>)> {
    let factors = scenario.validate()?;
    let m = scenario.dim();
    let total = scenario.total_len();
    let mut stream = StandardNormalStream::new(scenario.seed);
    let mut values = Vec::with_capacity(m * total);
    let mut z = vec![0.0; m];
    for (regime, l) in scenario.regimes.iter().zip(&factors) {
        for _ in 0..regime.length {
            z.iter_mut().for_each(|v| *v = stream.next_normal());
            for i in 0..m {
                let row = &l.row(i)[..=i];
                let lz: f64 = row.iter().zip(&z).map(|(a, b)| a * b).sum();
                values.push(regime.mean[i] + lz);
            }
        }
    }
    let data =
        ReturnMatrix::from_column_major(m, values, default_labels(m), index_timestamps(total))?;
    Ok((data, scenario.boundaries()))
}

/// Equicorrelated covariance: `variance` on the diagonal, `variance·rho` elsewhere.
pub fn equicorrelated(dim: usize, variance: f64, rho: f64) -> Matrix {
    let mut c = Matrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            c[(i, j)] = if i == j { variance } else { variance * rho };
        }
    }
    c
}
