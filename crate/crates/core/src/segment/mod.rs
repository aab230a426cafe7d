// SPDX-License-Identifier: MIT OR Apache-2.0

//! Split-gain spectra and recursive bisection into Gaussian regimes.

mod recursive;
mod spectrum;

use serde::Serialize;

use crate::error::{CovsegError, Result};

pub use recursive::{
    refine_boundaries, segment_recursive, LeafReason, RefinementSummary, Segment,
    SegmentationResult, SplitNode,
};
pub use spectrum::{
    admissible_offsets, brute_force_delta, delta_spectrum, normalized_js, DeltaSpectrum,
};

pub const DEFAULT_MARGIN_FACTOR: usize = 3;
pub const DEFAULT_MAX_DEPTH: usize = 30;
pub const DEFAULT_DELTA0_PER_SERIES: f64 = 10.0;
pub const MAX_REFINE_SWEEPS: usize = 10;

/// Parameters of the recursive split search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitConfig {
    /// Minimum Δ* required to accept a split.
    pub delta0: f64,
    /// Each side of a split keeps at least `min_margin_factor·M + 1` columns.
    pub min_margin_factor: usize,
    pub max_depth: usize,
    /// Diagonal jitter `ε·trace(C)/M` added to every window covariance.
    pub jitter_epsilon: f64,
    /// Run the boundary refinement sweeps after bisection.
    pub refine: bool,
}

impl SplitConfig {
    /// Defaults for `M` series: Δ₀ = 10·M, margins 3M+1, depth cap 30.
    pub fn for_dim(dim: usize) -> Self {
        Self {
            delta0: DEFAULT_DELTA0_PER_SERIES * dim as f64,
            min_margin_factor: DEFAULT_MARGIN_FACTOR,
            max_depth: DEFAULT_MAX_DEPTH,
            jitter_epsilon: 0.0,
            refine: false,
        }
    }

    /// Smallest admissible split offset `kM + 1`.
    pub fn margin(&self, dim: usize) -> usize {
        self.min_margin_factor * dim + 1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta0 > 0.0) || !self.delta0.is_finite() {
            return Err(CovsegError::InvalidConfig(format!(
                "delta0 must be finite and > 0; got {}",
                self.delta0
            )));
        }
        if self.min_margin_factor < 1 {
            return Err(CovsegError::InvalidConfig(
                "min_margin_factor must be >= 1".into(),
            ));
        }
        if self.max_depth < 1 {
            return Err(CovsegError::InvalidConfig("max_depth must be >= 1".into()));
        }
        if !(self.jitter_epsilon >= 0.0) || !self.jitter_epsilon.is_finite() {
            return Err(CovsegError::InvalidConfig(format!(
                "jitter_epsilon must be finite and >= 0; got {}",
                self.jitter_epsilon
            )));
        }
        Ok(())
    }
}
