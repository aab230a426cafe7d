// SPDX-License-Identifier: MIT OR Apache-2.0

//! Segment tables, plot-ready series and the recursion tree as text.
//!
//! Every number is emitted with 12 significant digits.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::data::{ReturnMatrix, Timestamp};
use crate::ingest::{Alignment, ReturnKind};
use crate::segment::{DeltaSpectrum, SegmentationResult, SplitConfig, SplitNode};

pub const TOOL_NAME: &str = "covseg";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Text form of [`round_sig`]: plain decimal for moderate magnitudes, exponent otherwise.
pub fn fmt_num(x: f64) -> String {
    let r = round_sig(x);
    let a = r.abs();
    if r == 0.0 {
        "0".to_string()
    } else if (1e-4..1e15).contains(&a) {
        format!("{r}")
    } else {
        let s = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, r);
        // Trim trailing zeros in the mantissa.
        match s.split_once('e') {
            Some((mant, exp)) if mant.contains('.') => {
                let mant = mant.trim_end_matches('0').trim_end_matches('.');
                format!("{mant}e{exp}")
            }
            _ => s,
        }
    }
}

fn round_all(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| round_sig(*x)).collect()
}

/// Provenance of a run, written at the head of every document.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub series: usize,
    pub observations: usize,
    pub delta0: f64,
    pub margin_factor: usize,
    /// Smallest split offset `kM + 1`; the largest is `n − t_min` for a segment of length `n`.
    pub t_min: usize,
    pub max_depth: usize,
    pub jitter_epsilon: f64,
    pub refine: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub returns: Option<ReturnKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alignment: Option<Alignment>,
    pub labels: Vec<String>,
    pub config_hash: String,
    pub max_depth_reached: bool,
}

impl RunMetadata {
    pub fn new(
        data: &ReturnMatrix,
        config: &SplitConfig,
        returns: Option<ReturnKind>,
        alignment: Option<Alignment>,
    ) -> Self {
        let canonical = json!({
            "config": config,
            "returns": returns,
            "alignment": alignment,
            "series": data.dim(),
            "observations": data.len(),
        });
        let digest = Sha256::digest(canonical.to_string().as_bytes());
        Self {
            tool: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
            series: data.dim(),
            observations: data.len(),
            delta0: config.delta0,
            margin_factor: config.min_margin_factor,
            t_min: config.margin(data.dim()),
            max_depth: config.max_depth,
            jitter_epsilon: config.jitter_epsilon,
            refine: config.refine,
            returns,
            alignment,
            labels: data.labels().to_vec(),
            config_hash: hex::encode(&digest[..8]),
            max_depth_reached: false,
        }
    }
}

/// One terminal segment as reported; `k` counts from 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentRow {
    pub k: usize,
    pub start_index: usize,
    /// Exclusive.
    pub end_index: usize,
    pub start: Timestamp,
    /// Timestamp of the last column in the segment.
    pub end: Timestamp,
    pub length: usize,
    pub entropy: f64,
    pub eigenvalues: Vec<f64>,
    pub mean: Vec<f64>,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentReport {
    pub metadata: RunMetadata,
    pub segments: Vec<SegmentRow>,
}

impl SegmentReport {
    pub fn new(
        data: &ReturnMatrix,
        result: &SegmentationResult,
        mut metadata: RunMetadata,
    ) -> Self {
        metadata.max_depth_reached = result.tree.hit_max_depth();
        let ts = data.timestamps();
        let segments = result
            .segments
            .iter()
            .enumerate()
            .map(|(i, seg)| SegmentRow {
                k: i + 1,
                start_index: seg.range.start,
                end_index: seg.range.end,
                start: ts[seg.range.start],
                end: ts[seg.range.end - 1],
                length: seg.range.len(),
                entropy: round_sig(seg.entropy),
                eigenvalues: round_all(&seg.eigenvalues),
                mean: round_all(&seg.stats.mean),
                depth: seg.depth,
            })
            .collect();
        Self { metadata, segments }
    }

    fn header_comment(&self) -> String {
        let m = &self.metadata;
        format!(
            "# {} {} series={} observations={} delta0={} margin_factor={} t_min={} config_hash={}\n",
            m.tool,
            m.version,
            m.series,
            m.observations,
            fmt_num(m.delta0),
            m.margin_factor,
            m.t_min,
            m.config_hash
        )
    }

    /// Full segment table: boundaries, entropy, every eigenvalue and the mean vector.
    pub fn segments_csv(&self) -> String {
        let mut out = self.header_comment();
        out.push_str("k,start_index,end_index,start,end,length,entropy");
        for i in 1..=self.metadata.series {
            let _ = write!(out, ",lambda_{i}");
        }
        for label in &self.metadata.labels {
            let _ = write!(out, ",mean_{}", csv_field(label));
        }
        out.push('\n');
        for row in &self.segments {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{}",
                row.k,
                row.start_index,
                row.end_index,
                row.start,
                row.end,
                row.length,
                fmt_num(row.entropy)
            );
            for v in row.eigenvalues.iter().chain(&row.mean) {
                let _ = write!(out, ",{}", fmt_num(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn segments_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Per-segment entropy, one row per segment, for a step plot over time.
    pub fn entropy_csv(&self) -> String {
        let mut out = self.header_comment();
        out.push_str("k,start_index,end_index,start,end,entropy\n");
        for row in &self.segments {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                row.k,
                row.start_index,
                row.end_index,
                row.start,
                row.end,
                fmt_num(row.entropy)
            );
        }
        out
    }

    /// First and second covariance eigenvalues per segment.
    pub fn eigenvalues_csv(&self) -> String {
        let mut out = self.header_comment();
        out.push_str("k,start_index,end_index,start,end,lambda_1,lambda_2\n");
        for row in &self.segments {
            let second = row
                .eigenvalues
                .get(1)
                .map_or_else(String::new, |v| fmt_num(*v));
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.k,
                row.start_index,
                row.end_index,
                row.start,
                row.end,
                fmt_num(row.eigenvalues[0]),
                second
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\t']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn tree_value(node: &SplitNode, ts: &[Timestamp]) -> Value {
    match node {
        SplitNode::Split {
            range,
            depth,
            split,
            delta,
            left,
            right,
        } => json!({
            "kind": "split",
            "start_index": range.start,
            "end_index": range.end,
            "depth": depth,
            "split_index": split,
            "split_timestamp": ts[*split],
            "delta": round_sig(*delta),
            "accepted": true,
            "left": tree_value(left, ts),
            "right": tree_value(right, ts),
        }),
        SplitNode::Leaf {
            range,
            depth,
            reason,
            delta,
        } => {
            let mut v = json!({
                "kind": "leaf",
                "start_index": range.start,
                "end_index": range.end,
                "depth": depth,
                "reason": reason.as_str(),
                "accepted": false,
            });
            if let Some(d) = delta {
                v["delta"] = json!(round_sig(*d));
            }
            v
        }
    }
}

/// Recursion tree with every accepted split and every rejected Δ*.
pub fn tree_json(
    result: &SegmentationResult,
    data: &ReturnMatrix,
    metadata: &RunMetadata,
) -> String {
    let mut doc = json!({
        "metadata": metadata,
        "tree": tree_value(&result.tree, data.timestamps()),
    });
    if let Some(r) = &result.refinement {
        doc["refinement"] = json!(r);
    }
    let mut s = serde_json::to_string_pretty(&doc).expect("tree serializes");
    s.push('\n');
    s
}

/// `(t, Δ(t))` and `(t, Δ(t)/n)` columns with the maximizer flagged.
pub fn spectrum_csv(spectrum: &DeltaSpectrum, data: &ReturnMatrix) -> String {
    let range = spectrum.segment_range;
    let mut out = format!(
        "# {} {} range={}:{} length={} best_offset={} best_index={} best_delta={}\n",
        TOOL_NAME,
        TOOL_VERSION,
        range.start,
        range.end,
        range.len(),
        spectrum.best_offset,
        spectrum.best_split(),
        fmt_num(spectrum.best_value)
    );
    out.push_str("t,index,timestamp,delta,js_divergence,is_best\n");
    let normalized = spectrum.normalized();
    for ((t, d), js) in spectrum
        .offsets
        .iter()
        .zip(&spectrum.values)
        .zip(&normalized)
    {
        let idx = range.start + t;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            t,
            idx,
            data.timestamps()[idx],
            fmt_num(*d),
            fmt_num(*js),
            u8::from(*t == spectrum.best_offset)
        );
    }
    out
}

/// Writes a return matrix back out as a rate table starting at 1.0, so the
/// ingestion path reproduces the returns: `R(0) = 1`, `R(s+1) = R(s)·exp(r(s))`.
pub fn rates_csv(data: &ReturnMatrix) -> String {
    let mut out = String::from("t");
    for l in data.labels() {
        let _ = write!(out, ",{}", csv_field(l));
    }
    out.push('\n');
    let m = data.dim();
    let mut log_level = vec![0.0; m];
    let emit = |out: &mut String, stamp: i64, level: &[f64]| {
        let _ = write!(out, "{stamp}");
        for v in level {
            let _ = write!(out, ",{}", fmt_num(v.exp()));
        }
        out.push('\n');
    };
    emit(&mut out, 0, &log_level);
    for s in 0..data.len() {
        for (acc, r) in log_level.iter_mut().zip(data.column(s)) {
            *acc += r;
        }
        emit(&mut out, s as i64 + 1, &log_level);
    }
    out
}
