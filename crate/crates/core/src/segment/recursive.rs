// SPDX-License-Identifier: MIT OR Apache-2.0

use serde::Serialize;

use super::{delta_spectrum, SplitConfig, MAX_REFINE_SWEEPS};
use crate::data::{ReturnMatrix, Span};
use crate::error::{CovsegError, Result};
use crate::kernels::{eigen_symmetric, estimate_gaussian, gaussian_entropy, GaussianEstimate};

/// Why a range was not split further.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafReason {
    BelowThreshold,
    TooShort,
    MaxDepth,
}

impl LeafReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::BelowThreshold => "below_threshold",
            Self::TooShort => "too_short",
            Self::MaxDepth => "max_depth",
        }
    }
}

/// Binary record of the bisection. Internal nodes are accepted splits.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitNode {
    Split {
        range: Span,
        depth: usize,
        /// Global column where the right child starts.
        split: usize,
        delta: f64,
        left: Box<SplitNode>,
        right: Box<SplitNode>,
    },
    Leaf {
        range: Span,
        depth: usize,
        reason: LeafReason,
        /// Best Δ found in the range; absent for `too_short`.
        #[serde(skip_serializing_if = "Option::is_none")]
        delta: Option<f64>,
    },
}

impl SplitNode {
    pub fn range(&self) -> Span {
        match self {
            Self::Split { range, .. } | Self::Leaf { range, .. } => *range,
        }
    }

    /// Leaves in time order.
    pub fn leaves(&self) -> Vec<&SplitNode> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a SplitNode>) {
        match self {
            Self::Split { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
            leaf => out.push(leaf),
        }
    }

    /// Accepted splits in pre-order as `(column, Δ*)`.
    pub fn splits(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            if let Self::Split {
                split,
                delta,
                left,
                right,
                ..
            } = node
            {
                out.push((*split, *delta));
                stack.push(right);
                stack.push(left);
            }
        }
        out
    }

    pub fn hit_max_depth(&self) -> bool {
        self.leaves().iter().any(|l| {
            matches!(
                l,
                SplitNode::Leaf {
                    reason: LeafReason::MaxDepth,
                    ..
                }
            )
        })
    }
}

/// Terminal window with its fitted Gaussian, entropy and full spectrum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub range: Span,
    pub stats: GaussianEstimate,
    pub entropy: f64,
    /// All `M` covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub depth: usize,
}

impl Segment {
    fn fit(data: &ReturnMatrix, range: Span, depth: usize, jitter: f64) -> Result<Self> {
        let mut stats = estimate_gaussian(data, range)?;
        stats.covariance.add_jitter(jitter);
        let entropy = gaussian_entropy(&stats).map_err(|e| e.with_window(range, None))?;
        let eigenvalues = eigen_symmetric(&stats.covariance, false)?.eigenvalues;
        Ok(Self {
            range,
            stats,
            entropy,
            eigenvalues,
            depth,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefinementSummary {
    pub sweeps: usize,
    pub converged: bool,
    /// `(before, after)` for every boundary that moved.
    pub moves: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentationResult {
    /// Contiguous, time-ordered tiling of `[0, T)`.
    pub segments: Vec<Segment>,
    pub tree: SplitNode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement: Option<RefinementSummary>,
}

impl SegmentationResult {
    /// Interior boundaries: start columns of every segment after the first.
    pub fn boundaries(&self) -> Vec<usize> {
        self.segments
            .iter()
            .skip(1)
            .map(|s| s.range.start)
            .collect()
    }
}

/// Depth-first bisection at the Δ-maximizing column while Δ* ≥ Δ₀.
pub fn segment_recursive(data: &ReturnMatrix, config: &SplitConfig) -> Result<SegmentationResult> {
    config.validate()?;
    let tree = grow(data, data.full_span(), 0, config)?;

    let leaves: Vec<(Span, usize)> = tree
        .leaves()
        .into_iter()
        .map(|l| match l {
            SplitNode::Leaf { range, depth, .. } => (*range, *depth),
            SplitNode::Split { .. } => unreachable!("leaves() yields leaves"),
        })
        .collect();

    let (spans, refinement) = if config.refine && leaves.len() > 1 {
        let bounds: Vec<usize> = leaves.iter().skip(1).map(|(r, _)| r.start).collect();
        let (refined, summary) = refine_boundaries(data, &bounds, config)?;
        let mut edges = vec![0];
        edges.extend(refined);
        edges.push(data.len());
        let spans = edges
            .windows(2)
            .zip(&leaves)
            .map(|(w, (_, depth))| (Span::new(w[0], w[1]), *depth))
            .collect();
        (spans, Some(summary))
    } else {
        (leaves, None)
    };

    let segments = spans
        .into_iter()
        .map(|(range, depth)| Segment::fit(data, range, depth, config.jitter_epsilon))
        .collect::<Result<Vec<_>>>()?;
    Ok(SegmentationResult {
        segments,
        tree,
        refinement,
    })
}

fn grow(data: &ReturnMatrix, range: Span, depth: usize, config: &SplitConfig) -> Result<SplitNode> {
    let spectrum = match delta_spectrum(data, range, config) {
        Ok(s) => s,
        Err(CovsegError::SegmentTooShort { .. }) => {
            return Ok(SplitNode::Leaf {
                range,
                depth,
                reason: LeafReason::TooShort,
                delta: None,
            })
        }
        Err(e) => return Err(e),
    };
    let delta = spectrum.best_value;
    if delta < config.delta0 {
        return Ok(SplitNode::Leaf {
            range,
            depth,
            reason: LeafReason::BelowThreshold,
            delta: Some(delta),
        });
    }
    if depth >= config.max_depth {
        return Ok(SplitNode::Leaf {
            range,
            depth,
            reason: LeafReason::MaxDepth,
            delta: Some(delta),
        });
    }
    let split = spectrum.best_split();
    let (left, right) = join(
        || grow(data, Span::new(range.start, split), depth + 1, config),
        || grow(data, Span::new(split, range.end), depth + 1, config),
    );
    Ok(SplitNode::Split {
        range,
        depth,
        split,
        delta,
        left: Box::new(left?),
        right: Box::new(right?),
    })
}

#[cfg(feature = "parallel")]
fn join<A, B>(a: impl FnOnce() -> A + Send, b: impl FnOnce() -> B + Send) -> (A, B)
where
    A: Send,
    B: Send,
{
    rayon::join(a, b)
}

#[cfg(not(feature = "parallel"))]
fn join<A, B>(a: impl FnOnce() -> A, b: impl FnOnce() -> B) -> (A, B) {
    (a(), b())
}

/// Re-optimizes each interior boundary between its fixed neighbours, sweeping
/// left to right until nothing moves or `MAX_REFINE_SWEEPS` is reached.
///
/// A boundary whose neighbourhood is too short for the admissible window stays put.
pub fn refine_boundaries(
    data: &ReturnMatrix,
    boundaries: &[usize],
    config: &SplitConfig,
) -> Result<(Vec<usize>, RefinementSummary)> {
    let mut bounds = boundaries.to_vec();
    let mut moves: Vec<(usize, usize)> = Vec::new();
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < MAX_REFINE_SWEEPS {
        sweeps += 1;
        let mut moved = false;
        for i in 0..bounds.len() {
            let lo = if i == 0 { 0 } else { bounds[i - 1] };
            let hi = bounds.get(i + 1).copied().unwrap_or(data.len());
            let best = match delta_spectrum(data, Span::new(lo, hi), config) {
                Ok(s) => s.best_split(),
                Err(CovsegError::SegmentTooShort { .. }) => continue,
                Err(e) => return Err(e),
            };
            if best != bounds[i] {
                match moves.iter_mut().find(|(_, after)| *after == bounds[i]) {
                    Some(entry) => entry.1 = best,
                    None => moves.push((bounds[i], best)),
                }
                bounds[i] = best;
                moved = true;
            }
        }
        if !moved {
            converged = true;
            break;
        }
    }
    moves.retain(|(before, after)| before != after);
    Ok((
        bounds,
        RefinementSummary {
            sweeps,
            converged,
            moves,
        },
    ))
}
