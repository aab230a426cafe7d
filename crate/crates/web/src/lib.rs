// SPDX-License-Identifier: MIT OR Apache-2.0

//! wasm-bindgen surface for `www/index.html`.
//!
//! Every export takes plain values and returns a JSON string. The `*_json`
//! functions hold the logic and are callable natively; the exported wrappers
//! only turn errors into JS exceptions.

use covseg::kernels::{
    eigen_symmetric, estimate_gaussian, marchenko_pastur_density, marchenko_pastur_support,
};
use covseg::report::round_sig;
use covseg::segment::{delta_spectrum, segment_recursive, SplitConfig, SplitNode};
use covseg::synth::{parse_scenario, sample_scenario, standard_normal_stream};
use covseg::{ReturnMatrix, Span};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn sample(scenario: &str, seed: Option<u64>) -> Result<(ReturnMatrix, Vec<usize>), String> {
    let mut file = parse_scenario(scenario, "scenario").map_err(|e| e.to_string())?;
    if let Some(s) = seed {
        file.scenario.seed = s;
    }
    sample_scenario(&file.scenario).map_err(|e| e.to_string())
}

fn config(dim: usize, delta0: f64) -> SplitConfig {
    let mut c = SplitConfig::for_dim(dim);
    // Non-positive means "use the default 10·M".
    if delta0 > 0.0 {
        c.delta0 = delta0;
    }
    c
}

fn rounded(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| round_sig(*x)).collect()
}

fn tree_splits(node: &SplitNode, out: &mut Vec<Value>) {
    match node {
        SplitNode::Split {
            split,
            delta,
            depth,
            left,
            right,
            ..
        } => {
            out.push(json!({ "index": split, "delta": round_sig(*delta), "depth": depth, "accepted": true }));
            tree_splits(left, out);
            tree_splits(right, out);
        }
        SplitNode::Leaf {
            range,
            delta: Some(d),
            depth,
            ..
        } => out.push(json!({
            "start": range.start, "end": range.end, "delta": round_sig(*d), "depth": depth, "accepted": false
        })),
        SplitNode::Leaf { .. } => {}
    }
}

/// Samples the scenario and segments it. Returns the cumulative log-levels of
/// every series (for plotting), true and found boundaries, per-segment
/// entropy and leading eigenvalues, and every accepted or rejected Δ*.
pub fn synthesize_and_segment_json(
    scenario: &str,
    seed: Option<u64>,
    delta0: f64,
) -> Result<String, String> {
    let (data, truth) = sample(scenario, seed)?;
    let cfg = config(data.dim(), delta0);
    let result = segment_recursive(&data, &cfg).map_err(|e| e.to_string())?;

    let levels: Vec<Vec<f64>> = (0..data.dim())
        .map(|i| {
            let mut acc = 0.0;
            data.series(i)
                .map(|r| {
                    acc += r;
                    round_sig(acc)
                })
                .collect()
        })
        .collect();
    let segments: Vec<Value> = result
        .segments
        .iter()
        .enumerate()
        .map(|(k, s)| {
            json!({
                "k": k + 1,
                "start": s.range.start,
                "end": s.range.end,
                "entropy": round_sig(s.entropy),
                "eigenvalues": rounded(&s.eigenvalues),
            })
        })
        .collect();
    let mut decisions = Vec::new();
    tree_splits(&result.tree, &mut decisions);
    Ok(json!({
        "series": data.dim(),
        "observations": data.len(),
        "delta0": cfg.delta0,
        "t_min": cfg.margin(data.dim()),
        "levels": levels,
        "truth": truth,
        "boundaries": result.boundaries(),
        "segments": segments,
        "decisions": decisions,
    })
    .to_string())
}

/// Δ(t) and Δ(t)/n over `[start, end)` of the sampled scenario; `end == 0`
/// means the full series.
pub fn spectrum_json(
    scenario: &str,
    seed: Option<u64>,
    start: usize,
    end: usize,
) -> Result<String, String> {
    let (data, truth) = sample(scenario, seed)?;
    let end = if end == 0 { data.len() } else { end };
    let range = Span::new(start, end);
    let spectrum =
        delta_spectrum(&data, range, &config(data.dim(), 0.0)).map_err(|e| e.to_string())?;
    Ok(json!({
        "start": start,
        "end": end,
        "offsets": spectrum.offsets,
        "delta": rounded(&spectrum.values),
        "js": rounded(&spectrum.normalized()),
        "best_offset": spectrum.best_offset,
        "best_delta": round_sig(spectrum.best_value),
        "truth": truth,
    })
    .to_string())
}

/// Marčenko–Pastur density for `M` series over `T` observations (unit
/// variance) next to a histogram of the sample-covariance eigenvalues of
/// seeded white noise of the same shape.
pub fn marchenko_pastur_json(m: usize, t: usize, seed: u64, bins: usize) -> Result<String, String> {
    if m == 0 || t < 2 || bins == 0 {
        return Err("need M ≥ 1, T ≥ 2 and at least one bin".into());
    }
    let (lo, hi) = marchenko_pastur_support(m, t, 1.0);
    let points = 400;
    let curve: Vec<[f64; 2]> = (0..=points)
        .map(|k| {
            let lambda = lo + (hi - lo) * k as f64 / points as f64;
            [
                round_sig(lambda),
                round_sig(marchenko_pastur_density(lambda, m, t, 1.0)),
            ]
        })
        .collect();

    let mut z = standard_normal_stream(seed);
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..t).map(|_| z.next_normal()).collect())
        .collect();
    let noise = ReturnMatrix::from_rows_indexed(&rows).map_err(|e| e.to_string())?;
    let est = estimate_gaussian(&noise, noise.full_span()).map_err(|e| e.to_string())?;
    let eig = eigen_symmetric(&est.covariance, false).map_err(|e| e.to_string())?;

    let top = eig.eigenvalues.iter().cloned().fold(hi, f64::max);
    let width = top / bins as f64;
    let mut counts = vec![0usize; bins];
    for &l in &eig.eigenvalues {
        counts[((l / width) as usize).min(bins - 1)] += 1;
    }
    // Normalize to a density so it overlays the curve.
    let density: Vec<f64> = counts
        .iter()
        .map(|&c| round_sig(c as f64 / (m as f64 * width)))
        .collect();
    Ok(json!({
        "support": [round_sig(lo), round_sig(hi)],
        "curve": curve,
        "eigenvalues": rounded(&eig.eigenvalues),
        "bin_width": round_sig(width),
        "histogram": density,
    })
    .to_string())
}

fn to_js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

fn opt_seed(seed: f64) -> Option<u64> {
    (seed >= 0.0).then_some(seed as u64)
}

/// `seed < 0` keeps the scenario's own seed; `delta0 ≤ 0` uses 10·M.
#[wasm_bindgen(js_name = synthesizeAndSegment)]
pub fn synthesize_and_segment(scenario: &str, seed: f64, delta0: f64) -> Result<String, JsError> {
    to_js(synthesize_and_segment_json(
        scenario,
        opt_seed(seed),
        delta0,
    ))
}

#[wasm_bindgen(js_name = deltaSpectrum)]
pub fn delta_spectrum_curve(
    scenario: &str,
    seed: f64,
    start: usize,
    end: usize,
) -> Result<String, JsError> {
    to_js(spectrum_json(scenario, opt_seed(seed), start, end))
}

#[wasm_bindgen(js_name = marchenkoPastur)]
pub fn marchenko_pastur(m: usize, t: usize, seed: f64, bins: usize) -> Result<String, JsError> {
    to_js(marchenko_pastur_json(m, t, seed.max(0.0) as u64, bins))
}
