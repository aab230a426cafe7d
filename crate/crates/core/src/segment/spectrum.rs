// SPDX-License-Identifier: MIT OR Apache-2.0

use std::f64::consts::PI;

use serde::Serialize;

use super::SplitConfig;
use crate::data::{ReturnMatrix, Span};
use crate::error::{CovsegError, Result};
use crate::kernels::estimate_gaussian;
use crate::kernels::linalg::{cholesky_in_place, log_det_from_factor, Lu};

/// Split gain Δ(t) over the admissible offsets of one segment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaSpectrum {
    pub segment_range: Span,
    /// Split offsets relative to `segment_range.start`; the left window is `[0, t)`.
    pub offsets: Vec<usize>,
    pub values: Vec<f64>,
    pub best_offset: usize,
    pub best_value: f64,
}

impl DeltaSpectrum {
    /// Global column index of the best split.
    pub fn best_split(&self) -> usize {
        self.segment_range.start + self.best_offset
    }

    /// Δ(t)/n: the Jensen–Shannon divergence between the two fitted Gaussians
    /// with weights t/n and (n−t)/n.
    pub fn normalized(&self) -> Vec<f64> {
        normalized_js(self, self.segment_range.len())
    }
}

pub fn normalized_js(spectrum: &DeltaSpectrum, range_length: usize) -> Vec<f64> {
    let n = range_length as f64;
    spectrum.values.iter().map(|v| v / n).collect()
}

/// Admissible offsets `[kM+1, n−kM−1]` for a segment of length `n`.
pub fn admissible_offsets(len: usize, dim: usize, margin_factor: usize) -> Result<(usize, usize)> {
    let margin = margin_factor * dim + 1;
    let required = 2 * margin + 1;
    if len < required {
        return Err(CovsegError::SegmentTooShort {
            len,
            required,
            margin,
        });
    }
    Ok((margin, len - margin))
}

/// Running sums of centered observations and their outer products.
struct Moments {
    dim: usize,
    sum: Vec<f64>,
    outer: Vec<f64>,
}

impl Moments {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            sum: vec![0.0; dim],
            outer: vec![0.0; dim * dim],
        }
    }

    fn push(&mut self, x: &[f64]) {
        let m = self.dim;
        for i in 0..m {
            self.sum[i] += x[i];
            let row = &mut self.outer[i * m..i * m + i + 1];
            for (j, acc) in row.iter_mut().enumerate() {
                *acc += x[i] * x[j];
            }
        }
    }

    /// Writes the 1/count covariance of `self` (or of `base − self`) into the
    /// lower triangle of `out`.
    fn covariance_into(&self, base: Option<&Moments>, count: usize, jitter: f64, out: &mut [f64]) {
        let m = self.dim;
        let inv = 1.0 / count as f64;
        let mean = |i: usize| match base {
            Some(b) => (b.sum[i] - self.sum[i]) * inv,
            None => self.sum[i] * inv,
        };
        let mut trace = 0.0;
        for i in 0..m {
            let mi = mean(i);
            for j in 0..=i {
                let s2 = match base {
                    Some(b) => b.outer[i * m + j] - self.outer[i * m + j],
                    None => self.outer[i * m + j],
                };
                out[i * m + j] = s2 * inv - mi * mean(j);
            }
            trace += out[i * m + i];
        }
        if jitter > 0.0 {
            let bump = jitter * trace / m as f64;
            for i in 0..m {
                out[i * m + i] += bump;
            }
        }
    }
}

fn window_log_det(buf: &mut [f64], dim: usize) -> std::result::Result<f64, usize> {
    cholesky_in_place(buf, dim)?;
    Ok(log_det_from_factor(buf, dim))
}

/// Δ(t) = (n/2)·log|Ĉ| − (t/2)·log|Ĉ_L| − ((n−t)/2)·log|Ĉ_R| for every admissible t.
///
/// One left-to-right pass keeps running sums of the observations (centered on
/// the segment mean) and their outer products; the right window is the total
/// minus the left, so each t costs O(M²) accumulation plus two O(M³) Cholesky
/// factorizations.
pub fn delta_spectrum(
    data: &ReturnMatrix,
    range: Span,
    config: &SplitConfig,
) -> Result<DeltaSpectrum> {
    config.validate()?;
    data.check_span(range)?;
    let m = data.dim();
    let n = range.len();
    let (t_min, t_max) = admissible_offsets(n, m, config.min_margin_factor)?;
    let singular = |pivot: usize, t: Option<usize>| CovsegError::SingularCovariance {
        pivot,
        range: Some(range),
        offset: t,
    };

    let mut shift = vec![0.0; m];
    for s in range.start..range.end {
        for (acc, v) in shift.iter_mut().zip(data.column(s)) {
            *acc += v;
        }
    }
    shift.iter_mut().for_each(|v| *v /= n as f64);

    let mut centered = vec![0.0; m];
    let center = |s: usize, out: &mut Vec<f64>| {
        for ((o, v), mu) in out.iter_mut().zip(data.column(s)).zip(&shift) {
            *o = v - mu;
        }
    };

    let mut total = Moments::new(m);
    for s in range.start..range.end {
        center(s, &mut centered);
        total.push(&centered);
    }

    let mut buf = vec![0.0; m * m];
    total.covariance_into(None, n, config.jitter_epsilon, &mut buf);
    let log_det_full = window_log_det(&mut buf, m).map_err(|p| singular(p, None))?;

    let nf = n as f64;
    let mut left = Moments::new(m);
    let mut offsets = Vec::with_capacity(t_max - t_min + 1);
    let mut values = Vec::with_capacity(t_max - t_min + 1);
    let mut best_offset = t_min;
    let mut best_value = f64::NEG_INFINITY;
    for t in 1..=t_max {
        center(range.start + t - 1, &mut centered);
        left.push(&centered);
        if t < t_min {
            continue;
        }
        left.covariance_into(None, t, config.jitter_epsilon, &mut buf);
        let log_det_left = window_log_det(&mut buf, m).map_err(|p| singular(p, Some(t)))?;
        left.covariance_into(Some(&total), n - t, config.jitter_epsilon, &mut buf);
        let log_det_right = window_log_det(&mut buf, m).map_err(|p| singular(p, Some(t)))?;

        let tf = t as f64;
        // Same as the docstring form, grouped so the large n·log|Ĉ| terms cancel first.
        let delta =
            0.5 * (tf * (log_det_full - log_det_left) + (nf - tf) * (log_det_full - log_det_right));
        if delta > best_value {
            best_value = delta;
            best_offset = t;
        }
        offsets.push(t);
        values.push(delta);
    }

    Ok(DeltaSpectrum {
        segment_range: range,
        offsets,
        values,
        best_offset,
        best_value,
    })
}

/// Δ(t) = log L₂(t) − log L₁ by summing per-observation Gaussian log-densities
/// with window MLE parameters.
///
/// Independent of [`delta_spectrum`]: two-pass window estimates, LU
/// factorization and an explicit solve per observation. Intended as a
/// reference for testing; any split `0 < t < n` is accepted.
pub fn brute_force_delta(data: &ReturnMatrix, range: Span, t: usize) -> Result<f64> {
    data.check_span(range)?;
    let n = range.len();
    if t == 0 || t >= n {
        return Err(CovsegError::InvalidConfig(format!(
            "split offset {t} must lie strictly inside a segment of length {n}"
        )));
    }
    let split = range.start + t;
    // All pieces go into one compensated sum: the per-window normalizers are
    // large and cancel almost exactly.
    let mut acc = Neumaier::default();
    window_log_likelihood(data, range, -1.0, &mut acc).map_err(|e| e.with_window(range, None))?;
    window_log_likelihood(data, Span::new(range.start, split), 1.0, &mut acc)
        .map_err(|e| e.with_window(range, Some(t)))?;
    window_log_likelihood(data, Span::new(split, range.end), 1.0, &mut acc)
        .map_err(|e| e.with_window(range, Some(t)))?;
    Ok(acc.value())
}

/// Adds `sign ·` the window's log-likelihood to `acc`, term by term.
fn window_log_likelihood(
    data: &ReturnMatrix,
    window: Span,
    sign: f64,
    acc: &mut Neumaier,
) -> Result<()> {
    let est = estimate_gaussian(data, window)?;
    let m = data.dim();
    let lu = Lu::factor(&est.covariance)?;
    let (log_det, det_sign) = lu.log_abs_det();
    if det_sign < 0.0 {
        return Err(CovsegError::SingularCovariance {
            pivot: 0,
            range: None,
            offset: None,
        });
    }
    let n = window.len() as f64;
    acc.add(-0.5 * sign * n * m as f64 * (2.0 * PI).ln());
    acc.add(-0.5 * sign * n * log_det);
    let mut dev = vec![0.0; m];
    for s in window.start..window.end {
        for ((d, v), mu) in dev.iter_mut().zip(data.column(s)).zip(&est.mean) {
            *d = v - mu;
        }
        let solved = lu.solve(&dev);
        for (a, b) in dev.iter().zip(&solved) {
            acc.add(-0.5 * sign * a * b);
        }
    }
    Ok(())
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    carry: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn relaxed(margin_factor: usize) -> SplitConfig {
        SplitConfig {
            min_margin_factor: margin_factor,
            ..SplitConfig::for_dim(1)
        }
    }

    #[test]
    fn admissible_window_bounds() {
        assert_eq!(admissible_offsets(2760, 30, 3).unwrap(), (91, 2669));
        assert!(admissible_offsets(182, 30, 3).is_err());
        assert_eq!(admissible_offsets(183, 30, 3).unwrap(), (91, 92));
    }

    #[test]
    fn degenerate_half_is_singular() {
        let data = ReturnMatrix::from_rows_indexed(&[vec![-1.0, -1.0, 1.0, 1.0]]).unwrap();
        match brute_force_delta(&data, data.full_span(), 2) {
            Err(CovsegError::SingularCovariance { range, offset, .. }) => {
                assert_eq!(range, Some(Span::new(0, 4)));
                assert_eq!(offset, Some(2));
            }
            other => panic!("expected singular covariance, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_half_is_singular_in_streaming_path() {
        let data =
            ReturnMatrix::from_rows_indexed(&[vec![-1.0, -1.0, -1.0, 1.0, 1.0, 1.0]]).unwrap();
        let err = delta_spectrum(&data, data.full_span(), &relaxed(1)).unwrap_err();
        assert!(matches!(
            err,
            CovsegError::SingularCovariance {
                offset: Some(2),
                ..
            }
        ));
        assert!(err.to_string().contains("t=2"));
    }

    #[test]
    fn too_short_is_reported() {
        let data =
            ReturnMatrix::from_rows_indexed(&[vec![0.1, 0.4, -0.3, 0.2, 0.7, -0.1, 0.0]]).unwrap();
        assert!(matches!(
            delta_spectrum(&data, data.full_span(), &SplitConfig::for_dim(1)),
            Err(CovsegError::SegmentTooShort {
                len: 7,
                required: 9,
                margin: 4
            })
        ));
    }

    #[test]
    fn normalization_divides_by_length() {
        let spectrum = DeltaSpectrum {
            segment_range: Span::new(0, 3000),
            offsets: vec![10, 11, 12],
            values: vec![0.0, 300.0, 150.0],
            best_offset: 11,
            best_value: 300.0,
        };
        let js = spectrum.normalized();
        assert_eq!(js, vec![0.0, 0.1, 0.05]);
        let argmax = js
            .iter()
            .enumerate()
            .fold(0, |b, (i, v)| if *v > js[b] { i } else { b });
        assert_eq!(spectrum.offsets[argmax], spectrum.best_offset);

        let zeros = DeltaSpectrum {
            values: vec![0.0; 3],
            ..spectrum
        };
        assert!(normalized_js(&zeros, 3000).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn ties_resolve_to_smallest_offset() {
        // Symmetric data: identical halves give a spectrum symmetric about the middle.
        let half = vec![0.3, -1.2, 0.8, 2.0, -0.4, 1.1, -0.9, 0.5, -2.2, 0.6];
        let mut row = half.clone();
        row.extend(half.iter().rev());
        let data = ReturnMatrix::from_rows_indexed(&[row]).unwrap();
        let spec = delta_spectrum(&data, data.full_span(), &relaxed(1)).unwrap();
        let max = spec
            .values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(spec.best_value, max);
        let first = spec.offsets[spec.values.iter().position(|v| *v == max).unwrap()];
        assert_eq!(spec.best_offset, first);
    }
}
