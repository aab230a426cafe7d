// SPDX-License-Identifier: MIT OR Apache-2.0

//! Dense square-matrix primitives sized for covariance work (M up to a few dozen).

use std::ops::{Index, IndexMut};

use serde::Serialize;

use crate::error::{CovsegError, Result};

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds from row vectors; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(CovsegError::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { dim, data })
    }

    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(CovsegError::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimensions differ");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Replaces the matrix with `(A + Aᵀ)/2`.
    pub fn symmetrize(&mut self) {
        let n = self.dim;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = avg;
                self[(j, i)] = avg;
            }
        }
    }

    /// Adds `epsilon · trace/M` to the diagonal. No-op for `epsilon == 0`.
    pub fn add_jitter(&mut self, epsilon: f64) {
        if epsilon == 0.0 || self.dim == 0 {
            return;
        }
        let bump = epsilon * self.trace() / self.dim as f64;
        for i in 0..self.dim {
            self[(i, i)] += bump;
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

/// Pivots at or below `dim · ε · max_diag` count as non-positive.
fn pivot_floor(a: &[f64], dim: usize) -> f64 {
    let max_diag = (0..dim).fold(0.0_f64, |m, i| m.max(a[i * dim + i]));
    dim as f64 * f64::EPSILON * max_diag
}

/// In-place lower Cholesky factorization of a row-major `dim × dim` buffer.
///
/// Only the lower triangle is read and written. Returns the index of the first
/// pivot that is numerically non-positive.
pub(crate) fn cholesky_in_place(a: &mut [f64], dim: usize) -> std::result::Result<(), usize> {
    let floor = pivot_floor(a, dim);
    for j in 0..dim {
        let mut d = a[j * dim + j];
        for k in 0..j {
            let l = a[j * dim + k];
            d -= l * l;
        }
        if !(d > floor) {
            return Err(j);
        }
        let d = d.sqrt();
        a[j * dim + j] = d;
        for i in (j + 1)..dim {
            let mut s = a[i * dim + j];
            for k in 0..j {
                s -= a[i * dim + k] * a[j * dim + k];
            }
            a[i * dim + j] = s / d;
        }
    }
    Ok(())
}

/// `log|A|` of the lower Cholesky factor held in `a`.
pub(crate) fn log_det_from_factor(a: &[f64], dim: usize) -> f64 {
    2.0 * (0..dim).map(|i| a[i * dim + i].ln()).sum::<f64>()
}

/// Lower Cholesky factor `L` with `L·Lᵀ = A`.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.dim();
    let mut buf = a.data.clone();
    cholesky_in_place(&mut buf, n).map_err(|pivot| CovsegError::SingularCovariance {
        pivot,
        range: None,
        offset: None,
    })?;
    for i in 0..n {
        for j in (i + 1)..n {
            buf[i * n + j] = 0.0;
        }
    }
    Ok(Matrix { dim: n, data: buf })
}

/// `log|C|` via Cholesky: `2·Σ log L_ii`.
pub fn log_det_psd(cov: &Matrix) -> Result<f64> {
    let n = cov.dim();
    let mut buf = cov.data.clone();
    cholesky_in_place(&mut buf, n).map_err(|pivot| CovsegError::SingularCovariance {
        pivot,
        range: None,
        offset: None,
    })?;
    Ok(log_det_from_factor(&buf, n))
}

/// Eigenvalues sorted descending, optionally with orthonormal eigenvectors as columns.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenSpectrum {
    pub eigenvalues: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvectors: Option<Matrix>,
}

fn check_symmetric(a: &Matrix) -> Result<()> {
    let tol = 1e-10 * a.max_abs().max(1.0);
    let n = a.dim();
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (a[(i, j)] - a[(j, i)]).abs();
            if !(gap <= tol) {
                return Err(CovsegError::AsymmetricMatrix {
                    row: i,
                    col: j,
                    gap,
                });
            }
        }
    }
    Ok(())
}

/// Full spectrum of a symmetric matrix by cyclic Jacobi rotations.
pub fn eigen_symmetric(a: &Matrix, with_vectors: bool) -> Result<EigenSpectrum> {
    check_symmetric(a)?;
    let n = a.dim();
    let mut w = a.clone();
    w.symmetrize();
    let mut v = with_vectors.then(|| Matrix::identity(n));

    let scale = w.as_slice().iter().map(|x| x * x).sum::<f64>();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| w[(i, j)] * w[(i, j)])
            .sum();
        if off <= f64::EPSILON * f64::EPSILON * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = w[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (w[(q, q)] - w[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut w, p, q, c, s);
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(j, j)].total_cmp(&w[(i, i)]));
    let eigenvalues = order.iter().map(|&i| w[(i, i)]).collect();
    let eigenvectors = v.map(|v| {
        let mut sorted = Matrix::zeros(n);
        for (col, &src) in order.iter().enumerate() {
            for k in 0..n {
                sorted[(k, col)] = v[(k, src)];
            }
        }
        sorted
    });
    Ok(EigenSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

// Two-sided Jacobi rotation zeroing w[p][q].
fn rotate(w: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = w.dim();
    for k in 0..n {
        let wkp = w[(k, p)];
        let wkq = w[(k, q)];
        w[(k, p)] = c * wkp - s * wkq;
        w[(k, q)] = s * wkp + c * wkq;
    }
    for k in 0..n {
        let wpk = w[(p, k)];
        let wqk = w[(q, k)];
        w[(p, k)] = c * wpk - s * wqk;
        w[(q, k)] = s * wpk + c * wqk;
    }
    w[(p, q)] = 0.0;
    w[(q, p)] = 0.0;
}

/// LU factorization with partial pivoting, used by the per-observation
/// likelihood path so it shares no code with the Cholesky route.
pub(crate) struct Lu {
    dim: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub(crate) fn factor(a: &Matrix) -> Result<Self> {
        let n = a.dim();
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let floor = n as f64 * f64::EPSILON * a.max_abs();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[i * n + k].abs().total_cmp(&lu[j * n + k].abs()))
                .unwrap_or(k);
            if !(lu[p * n + k].abs() > floor) {
                return Err(CovsegError::SingularCovariance {
                    pivot: k,
                    range: None,
                    offset: None,
                });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                for j in (k + 1)..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
        Ok(Self {
            dim: n,
            lu,
            perm,
            sign,
        })
    }

    /// `log|det A|` and the determinant's sign.
    pub(crate) fn log_abs_det(&self) -> (f64, f64) {
        let n = self.dim;
        let mut sign = self.sign;
        let mut acc = 0.0;
        for i in 0..n {
            let u = self.lu[i * n + i];
            if u < 0.0 {
                sign = -sign;
            }
            acc += u.abs().ln();
        }
        (acc, sign)
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] -= self.lu[i * n + j] * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}
