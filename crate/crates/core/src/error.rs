// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use crate::data::Span;

#[derive(Debug, thiserror::Error)]
pub enum CovsegError {
    #[error("empty window")]
    EmptyWindow,

    #[error("singular covariance (non-positive Cholesky pivot at index {pivot}){}", singular_context(.range, .offset))]
    SingularCovariance {
        pivot: usize,
        range: Option<Span>,
        offset: Option<usize>,
    },

    #[error("asymmetric matrix: |a[{row}][{col}] - a[{col}][{row}]| = {gap:e}")]
    AsymmetricMatrix { row: usize, col: usize, gap: f64 },

    #[error("segment too short: length {len}, need at least {required} for margin {margin}")]
    SegmentTooShort {
        len: usize,
        required: usize,
        margin: usize,
    },

    #[error("range out of bounds: {range} exceeds {len} columns")]
    RangeOutOfBounds { range: Span, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("non-positive rate {value} at row {row}, column '{column}'")]
    NonPositiveRate {
        row: usize,
        column: String,
        value: f64,
    },

    #[error("missing value at timestamp {timestamp}, column '{column}'")]
    MissingCell { timestamp: String, column: String },
}

fn singular_context(range: &Option<Span>, offset: &Option<usize>) -> String {
    match (range, offset) {
        (Some(r), Some(t)) => format!(" in range {r} at t={t}"),
        (Some(r), None) => format!(" in range {r}"),
        (None, Some(t)) => format!(" at t={t}"),
        (None, None) => String::new(),
    }
}

impl CovsegError {
    /// Stable snake_case tag for machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::EmptyWindow => "empty_window",
            Self::SingularCovariance { .. } => "singular_covariance",
            Self::AsymmetricMatrix { .. } => "asymmetric_matrix",
            Self::SegmentTooShort { .. } => "segment_too_short",
            Self::RangeOutOfBounds { .. } => "range_out_of_bounds",
            Self::DimensionMismatch { .. } => "dimension_mismatch",
            Self::InvalidData(_) => "invalid_data",
            Self::InvalidConfig(_) => "invalid_config",
            Self::NotPositiveDefinite(_) => "not_positive_definite",
            Self::Io { .. } => "io",
            Self::Parse { .. } => "parse",
            Self::NonPositiveRate { .. } => "non_positive_rate",
            Self::MissingCell { .. } => "missing_cell",
        }
    }

    pub(crate) fn with_window(self, range: Span, t: Option<usize>) -> Self {
        match self {
            Self::SingularCovariance { pivot, .. } => Self::SingularCovariance {
                pivot,
                range: Some(range),
                offset: t,
            },
            other => other,
        }
    }
}

pub type Result<T, E = CovsegError> = std::result::Result<T, E>;
