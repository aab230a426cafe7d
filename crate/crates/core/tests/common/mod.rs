// SPDX-License-Identifier: MIT OR Apache-2.0

#![allow(dead_code)]

use covseg::kernels::Matrix;
use covseg::synth::{sample_scenario, standard_normal_stream, MixtureScenario, RegimeSpec};
use covseg::ReturnMatrix;

/// `M × T` matrix of i.i.d. normals with per-series scale and offset so the
/// covariance is not trivially the identity.
pub fn random_data(dim: usize, len: usize, seed: u64) -> ReturnMatrix {
    let mut z = standard_normal_stream(seed);
    let rows: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let scale = 0.5 + i as f64 * 0.7;
            let offset = (i as f64 - 1.0) * 0.3;
            (0..len).map(|_| offset + scale * z.next_normal()).collect()
        })
        .collect();
    ReturnMatrix::from_rows_indexed(&rows).unwrap()
}

pub fn single_regime(dim: usize, len: usize, seed: u64) -> ReturnMatrix {
    let scenario = MixtureScenario {
        regimes: vec![RegimeSpec::new(len, vec![0.0; dim], Matrix::identity(dim))],
        seed,
    };
    sample_scenario(&scenario).unwrap().0
}

/// |a − b| relative to the larger magnitude.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Dense matrix from a seeded stream, shifted towards the identity so it is
/// comfortably invertible.
pub fn well_conditioned(dim: usize, seed: u64) -> Matrix {
    let mut z = standard_normal_stream(seed);
    let mut a = Matrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            a[(i, j)] = 0.3 * z.next_normal() + if i == j { 2.0 } else { 0.0 };
        }
    }
    a
}
