// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use common::{random_data, rel_err, single_regime, well_conditioned};
use covseg::kernels::Matrix;
use covseg::segment::{
    brute_force_delta, delta_spectrum, segment_recursive, LeafReason, SplitConfig, SplitNode,
};
use covseg::synth::{equicorrelated, sample_scenario, MixtureScenario, RegimeSpec};
use covseg::ReturnMatrix;
use proptest::prelude::*;

fn relaxed(dim: usize) -> SplitConfig {
    SplitConfig {
        min_margin_factor: 1,
        ..SplitConfig::for_dim(dim)
    }
}

#[test]
fn streaming_spectrum_matches_likelihood_sums() {
    for (k, (dim, len)) in [(1, 50), (2, 50), (5, 50), (1, 200), (2, 200), (5, 200)]
        .into_iter()
        .enumerate()
    {
        let data = random_data(dim, len, 100 + k as u64);
        let spectrum = delta_spectrum(&data, data.full_span(), &SplitConfig::for_dim(dim)).unwrap();
        for (t, v) in spectrum.offsets.iter().zip(&spectrum.values) {
            let oracle = brute_force_delta(&data, data.full_span(), *t).unwrap();
            assert!(
                rel_err(*v, oracle) <= 1e-9,
                "M={dim} T={len} t={t}: {v} vs {oracle}"
            );
        }
    }
}

#[test]
fn hand_sized_dataset_matches_oracle() {
    let rows = vec![
        vec![
            0.8, -1.1, 0.3, 2.0, -0.4, 0.9, -1.7, 0.2, 1.4, -0.6, 0.05, -0.9,
        ],
        vec![
            0.1, 0.7, -0.5, 1.2, 0.3, -1.4, 0.6, 0.9, -0.2, 1.1, -0.8, 0.4,
        ],
    ];
    let data = ReturnMatrix::from_rows_indexed(&rows).unwrap();
    // Default margins (3M+1 = 7 per side) leave no admissible split in 12 columns.
    assert!(delta_spectrum(&data, data.full_span(), &SplitConfig::for_dim(2)).is_err());
    let spectrum = delta_spectrum(&data, data.full_span(), &relaxed(2)).unwrap();
    assert_eq!(spectrum.offsets, vec![3, 4, 5, 6, 7, 8, 9]);
    for (t, v) in spectrum.offsets.iter().zip(&spectrum.values) {
        let oracle = brute_force_delta(&data, data.full_span(), *t).unwrap();
        assert!((v - oracle).abs() <= 1e-9, "t={t}: {v} vs {oracle}");
    }
}

#[test]
fn identical_halves_give_zero_at_midpoint() {
    let half = random_data(2, 20, 5);
    let mut rows: Vec<Vec<f64>> = (0..2).map(|i| half.series(i).collect()).collect();
    for row in rows.iter_mut() {
        let mirrored: Vec<f64> = row.iter().rev().copied().collect();
        row.extend(mirrored);
    }
    let data = ReturnMatrix::from_rows_indexed(&rows).unwrap();
    let spectrum = delta_spectrum(&data, data.full_span(), &relaxed(2)).unwrap();
    let mid = spectrum.offsets.iter().position(|t| *t == 20).unwrap();
    assert!(
        spectrum.values[mid].abs() <= 1e-9,
        "{}",
        spectrum.values[mid]
    );
    assert!(
        brute_force_delta(&data, data.full_span(), 20)
            .unwrap()
            .abs()
            <= 1e-9
    );
}

#[test]
fn spectrum_on_an_interior_range_uses_relative_offsets() {
    let data = random_data(2, 120, 8);
    let range = covseg::Span::new(30, 100);
    let spectrum = delta_spectrum(&data, range, &SplitConfig::for_dim(2)).unwrap();
    assert_eq!(spectrum.segment_range, range);
    assert_eq!(*spectrum.offsets.first().unwrap(), 7);
    assert_eq!(*spectrum.offsets.last().unwrap(), 63);
    for (t, v) in spectrum.offsets.iter().zip(&spectrum.values).step_by(9) {
        let oracle = brute_force_delta(&data, range, *t).unwrap();
        assert!(rel_err(*v, oracle) <= 1e-9);
    }
    assert_eq!(spectrum.best_split(), 30 + spectrum.best_offset);
}

#[test]
fn jitter_regularizes_degenerate_windows() {
    // Series 2 duplicates series 1, so every window covariance is singular.
    let base = random_data(1, 40, 3);
    let row: Vec<f64> = base.series(0).collect();
    let data = ReturnMatrix::from_rows_indexed(&[row.clone(), row]).unwrap();
    assert!(matches!(
        delta_spectrum(&data, data.full_span(), &SplitConfig::for_dim(2)),
        Err(covseg::CovsegError::SingularCovariance { .. })
    ));
    let config = SplitConfig {
        jitter_epsilon: 1e-6,
        ..SplitConfig::for_dim(2)
    };
    let spectrum = delta_spectrum(&data, data.full_span(), &config).unwrap();
    assert!(spectrum.values.iter().all(|v| v.is_finite()));
}

#[test]
fn two_block_boundary_located() {
    let mut hits = 0;
    for seed in 0..100 {
        let scenario = MixtureScenario {
            regimes: vec![
                RegimeSpec::new(500, vec![0.0; 3], Matrix::identity(3)),
                RegimeSpec::new(500, vec![0.0; 3], Matrix::identity(3).scale(4.0)),
            ],
            seed,
        };
        let (data, _) = sample_scenario(&scenario).unwrap();
        let spectrum = delta_spectrum(&data, data.full_span(), &SplitConfig::for_dim(3)).unwrap();
        if spectrum.best_offset.abs_diff(500) <= 10 {
            hits += 1;
        }
    }
    assert!(hits >= 95, "boundary within ±10 in {hits}/100 runs");
}

#[test]
fn single_regime_stays_whole() {
    let mut whole = 0;
    for seed in 0..100 {
        let data = single_regime(3, 600, 10_000 + seed);
        let result = segment_recursive(&data, &SplitConfig::for_dim(3)).unwrap();
        if result.segments.len() == 1 {
            whole += 1;
            assert!(matches!(
                result.tree,
                SplitNode::Leaf {
                    reason: LeafReason::BelowThreshold,
                    delta: Some(d),
                    ..
                } if d < 30.0
            ));
        }
    }
    assert!(whole >= 95, "single segment in {whole}/100 runs");
}

#[test]
fn three_regimes_recovered() {
    let mut good = 0;
    for seed in 0..20 {
        let scenario = MixtureScenario {
            regimes: vec![
                RegimeSpec::new(500, vec![0.0; 5], Matrix::identity(5)),
                RegimeSpec::new(500, vec![0.0; 5], equicorrelated(5, 1.0, 0.8)),
                RegimeSpec::new(500, vec![0.0; 5], Matrix::identity(5).scale(4.0)),
            ],
            seed,
        };
        let (data, truth) = sample_scenario(&scenario).unwrap();
        let result = segment_recursive(&data, &SplitConfig::for_dim(5)).unwrap();
        let found = result.boundaries();
        if found.len() == 2 && found.iter().zip(&truth).all(|(f, t)| f.abs_diff(*t) <= 20) {
            good += 1;
        }
    }
    assert!(good >= 19, "recovered in {good}/20 runs");
}

#[test]
fn tree_thresholds_are_consistent() {
    let scenario = MixtureScenario {
        regimes: vec![
            RegimeSpec::new(300, vec![0.0; 2], Matrix::identity(2)),
            RegimeSpec::new(200, vec![0.5, 0.0], equicorrelated(2, 2.0, -0.6)),
            RegimeSpec::new(300, vec![0.0; 2], Matrix::identity(2).scale(0.3)),
        ],
        seed: 4,
    };
    let (data, _) = sample_scenario(&scenario).unwrap();
    let config = SplitConfig::for_dim(2);
    let result = segment_recursive(&data, &config).unwrap();
    fn walk(node: &SplitNode, delta0: f64) {
        match node {
            SplitNode::Split {
                delta,
                left,
                right,
                split,
                range,
                ..
            } => {
                assert!(*delta >= delta0);
                assert_eq!(left.range().end, *split);
                assert_eq!(right.range().start, *split);
                assert_eq!(left.range().start, range.start);
                assert_eq!(right.range().end, range.end);
                walk(left, delta0);
                walk(right, delta0);
            }
            SplitNode::Leaf { reason, delta, .. } => match reason {
                LeafReason::BelowThreshold => assert!(delta.unwrap() < delta0),
                LeafReason::TooShort => assert!(delta.is_none()),
                LeafReason::MaxDepth => assert!(delta.unwrap() >= delta0),
            },
        }
    }
    walk(&result.tree, config.delta0);
    assert_eq!(result.tree.leaves().len(), result.segments.len());
    assert_eq!(result.tree.splits().len(), result.segments.len() - 1);
}

#[test]
fn repeated_runs_are_identical() {
    let data = random_data(4, 400, 21);
    let config = SplitConfig {
        delta0: 5.0,
        ..SplitConfig::for_dim(4)
    };
    let a = segment_recursive(&data, &config).unwrap();
    let b = segment_recursive(&data, &config).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

fn affine(data: &ReturnMatrix, a: &Matrix, shift: &[f64]) -> ReturnMatrix {
    data.map_columns(|col| {
        a.mul_vec(col)
            .into_iter()
            .zip(shift)
            .map(|(v, b)| v + b)
            .collect()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectrum_is_nonnegative(dim in 1usize..5, len in 40usize..160, seed in any::<u64>()) {
        let data = random_data(dim, len, seed);
        let config = relaxed(dim);
        let spectrum = delta_spectrum(&data, data.full_span(), &config).unwrap();
        prop_assert!(spectrum.values.iter().all(|v| *v >= -1e-6));
        prop_assert_eq!(spectrum.values.len(), spectrum.offsets.len());
        let max = spectrum.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(spectrum.best_value, max);
    }

    #[test]
    fn spectrum_is_affine_invariant(dim in 1usize..5, seed in any::<u64>()) {
        let data = random_data(dim, 120, seed);
        let a = well_conditioned(dim, seed ^ 0x5eed);
        let shift: Vec<f64> = (0..dim).map(|i| 3.0 - i as f64).collect();
        let moved = affine(&data, &a, &shift);
        let config = SplitConfig::for_dim(dim);
        let before = delta_spectrum(&data, data.full_span(), &config).unwrap();
        let after = delta_spectrum(&moved, moved.full_span(), &config).unwrap();
        for (x, y) in before.values.iter().zip(&after.values) {
            prop_assert!(rel_err(*x, *y) <= 1e-7, "{} vs {}", x, y);
        }
        prop_assert_eq!(before.best_offset, after.best_offset);
    }

    #[test]
    fn spectrum_ignores_series_order(dim in 2usize..6, seed in any::<u64>()) {
        let data = random_data(dim, 100, seed);
        let mut rows: Vec<Vec<f64>> = (0..dim).map(|i| data.series(i).collect()).collect();
        rows.rotate_left(1);
        rows.swap(0, dim - 1);
        let permuted = ReturnMatrix::from_rows_indexed(&rows).unwrap();
        let config = SplitConfig::for_dim(dim);
        let a = delta_spectrum(&data, data.full_span(), &config).unwrap();
        let b = delta_spectrum(&permuted, permuted.full_span(), &config).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!(rel_err(*x, *y) <= 1e-12, "{} vs {}", x, y);
        }
    }

    #[test]
    fn segments_tile_the_series(
        dim in 1usize..4,
        len in 20usize..400,
        delta0 in 0.5f64..40.0,
        margin in 1usize..4,
        max_depth in 1usize..6,
        refine in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let data = random_data(dim, len, seed);
        let config = SplitConfig {
            delta0,
            min_margin_factor: margin,
            max_depth,
            jitter_epsilon: 0.0,
            refine,
        };
        let result = segment_recursive(&data, &config).unwrap();
        let mut cursor = 0;
        for seg in &result.segments {
            prop_assert_eq!(seg.range.start, cursor);
            prop_assert!(seg.range.len() >= 2);
            cursor = seg.range.end;
        }
        prop_assert_eq!(cursor, len);
    }
}
