// SPDX-License-Identifier: MIT OR Apache-2.0

//! Input containers: observation tags, column spans and the return matrix.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{CovsegError, Result};

/// Half-open column interval `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

impl From<std::ops::Range<usize>> for Span {
    fn from(r: std::ops::Range<usize>) -> Self {
        Self::new(r.start, r.end)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// Observation tag: an ISO calendar date or a plain integer index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Timestamp {
    Date(NaiveDate),
    Index(i64),
}

impl Timestamp {
    /// Parses `YYYY-MM-DD` or a signed integer.
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Ok(i) = s.parse::<i64>() {
            return Some(Self::Index(i));
        }
        NaiveDate::parse_from_str(s, "%Y-%m-%d")
            .ok()
            .map(Self::Date)
    }

    pub fn is_date(&self) -> bool {
        matches!(self, Self::Date(_))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            Self::Index(i) => write!(f, "{i}"),
        }
    }
}

impl Serialize for Timestamp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Date(_) => s.collect_str(self),
            Self::Index(i) => s.serialize_i64(*i),
        }
    }
}

/// M series × T observations of log-returns.
///
/// Stored column-major: the `M` values of observation `s` are contiguous,
/// which is the access pattern of every window accumulation.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnMatrix {
    dim: usize,
    values: Vec<f64>,
    labels: Vec<String>,
    timestamps: Vec<Timestamp>,
}

impl ReturnMatrix {
    /// Builds from per-series rows (`rows[i][s]` is series `i` at observation `s`).
    pub fn from_rows(
        rows: &[Vec<f64>],
        labels: Vec<String>,
        timestamps: Vec<Timestamp>,
    ) -> Result<Self> {
        let dim = rows.len();
        let len = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != len) {
            return Err(CovsegError::DimensionMismatch {
                expected: len,
                got: bad.len(),
            });
        }
        let mut values = Vec::with_capacity(dim * len);
        for s in 0..len {
            values.extend(rows.iter().map(|r| r[s]));
        }
        Self::from_column_major(dim, values, labels, timestamps)
    }

    /// Builds from a flat column-major buffer of `dim * T` values.
    pub fn from_column_major(
        dim: usize,
        values: Vec<f64>,
        labels: Vec<String>,
        timestamps: Vec<Timestamp>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(CovsegError::InvalidData("need at least one series".into()));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(CovsegError::InvalidData(format!(
                "{} values do not fill whole columns of height {dim}",
                values.len()
            )));
        }
        let len = values.len() / dim;
        if len < 2 {
            return Err(CovsegError::InvalidData(format!(
                "need at least 2 observations, got {len}"
            )));
        }
        if labels.len() != dim {
            return Err(CovsegError::DimensionMismatch {
                expected: dim,
                got: labels.len(),
            });
        }
        if timestamps.len() != len {
            return Err(CovsegError::DimensionMismatch {
                expected: len,
                got: timestamps.len(),
            });
        }
        if let Some(w) = timestamps.windows(2).position(|w| w[0] >= w[1]) {
            return Err(CovsegError::InvalidData(format!(
                "timestamps not strictly increasing at column {}",
                w + 1
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(CovsegError::InvalidData(format!(
                "non-finite value in series '{}' at column {}",
                labels[pos % dim],
                pos / dim
            )));
        }
        Ok(Self {
            dim,
            values,
            labels,
            timestamps,
        })
    }

    /// Convenience constructor with generated labels `s1..sM` and integer timestamps.
    pub fn from_rows_indexed(rows: &[Vec<f64>]) -> Result<Self> {
        let len = rows.first().map_or(0, Vec::len);
        Self::from_rows(rows, default_labels(rows.len()), index_timestamps(len))
    }

    /// Number of series `M`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of observations `T`.
    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn column(&self, s: usize) -> &[f64] {
        &self.values[s * self.dim..(s + 1) * self.dim]
    }

    pub fn get(&self, series: usize, s: usize) -> f64 {
        self.values[s * self.dim + series]
    }

    pub fn series(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(i).step_by(self.dim).copied()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn timestamps(&self) -> &[Timestamp] {
        &self.timestamps
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn full_span(&self) -> Span {
        Span::new(0, self.len())
    }

    pub(crate) fn check_span(&self, span: Span) -> Result<()> {
        if span.is_empty() {
            return Err(CovsegError::EmptyWindow);
        }
        if span.end > self.len() {
            return Err(CovsegError::RangeOutOfBounds {
                range: span,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// Returns a copy with every observation mapped through `f` (same shape).
    pub fn map_columns(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(self.values.len());
        for s in 0..self.len() {
            let out = f(self.column(s));
            if out.len() != self.dim {
                return Err(CovsegError::DimensionMismatch {
                    expected: self.dim,
                    got: out.len(),
                });
            }
            values.extend(out);
        }
        Self::from_column_major(
            self.dim,
            values,
            self.labels.clone(),
            self.timestamps.clone(),
        )
    }
}

pub(crate) fn default_labels(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("s{i}")).collect()
}

pub(crate) fn index_timestamps(len: usize) -> Vec<Timestamp> {
    (0..len as i64).map(Timestamp::Index).collect()
}
