// SPDX-License-Identifier: MIT OR Apache-2.0

use std::f64::consts::PI;

/// Support `[λ₋, λ₊]` of the Marčenko–Pastur law for `M` series, `T` observations.
pub fn marchenko_pastur_support(m: usize, t: usize, sigma2: f64) -> (f64, f64) {
    let root = (m as f64 / t as f64).sqrt();
    (sigma2 * (1.0 - root).powi(2), sigma2 * (1.0 + root).powi(2))
}

/// Marčenko–Pastur eigenvalue density of an `M × M` sample covariance built
/// from `T` i.i.d. observations with variance `sigma2`; zero off its support.
///
/// Used as a noise overlay for the spectra of short windows. Only normalized
/// to one when `M ≤ T`; above that ratio the remaining mass sits at zero.
pub fn marchenko_pastur_density(lambda: f64, m: usize, t: usize, sigma2: f64) -> f64 {
    if m == 0 || t == 0 || !(sigma2 > 0.0) || !(lambda > 0.0) {
        return 0.0;
    }
    let (lo, hi) = marchenko_pastur_support(m, t, sigma2);
    if lambda < lo || lambda > hi {
        return 0.0;
    }
    let ratio = t as f64 / m as f64;
    ratio * ((lambda - lo) * (hi - lambda)).max(0.0).sqrt() / (2.0 * PI * sigma2 * lambda)
}
