// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use common::{random_data, rel_err};
use covseg::kernels::{
    entropy_of_covariance, estimate_gaussian, marchenko_pastur_density, marchenko_pastur_support,
    Matrix,
};
use covseg::synth::{sample_scenario, standard_normal_stream, MixtureScenario, RegimeSpec};
use covseg::Span;
use statrs::distribution::{ContinuousCDF, Normal};

#[test]
fn covariance_matches_naive_double_loop() {
    for seed in 0..20 {
        let data = random_data(3, 20, seed);
        let est = estimate_gaussian(&data, data.full_span()).unwrap();
        let n = 20.0;
        for i in 0..3 {
            let mu_i: f64 = data.series(i).sum::<f64>() / n;
            assert!(rel_err(est.mean[i], mu_i) <= 1e-12);
            for j in 0..3 {
                let mu_j: f64 = data.series(j).sum::<f64>() / n;
                let mut acc = 0.0;
                for s in 0..20 {
                    acc += (data.get(i, s) - mu_i) * (data.get(j, s) - mu_j);
                }
                assert!(rel_err(est.covariance[(i, j)], acc / n) <= 1e-12);
            }
        }
    }
}

#[test]
fn eigen_solver_agrees_with_nalgebra() {
    for seed in 0..10 {
        let data = random_data(6, 80, seed);
        let cov = estimate_gaussian(&data, data.full_span())
            .unwrap()
            .covariance;
        let ours = covseg::kernels::eigen_symmetric(&cov, false)
            .unwrap()
            .eigenvalues;
        let na = nalgebra::DMatrix::from_row_slice(6, 6, cov.as_slice());
        let mut theirs: Vec<f64> = na.symmetric_eigenvalues().iter().copied().collect();
        theirs.sort_by(|a, b| b.total_cmp(a));
        for (a, b) in ours.iter().zip(&theirs) {
            assert!(rel_err(*a, *b) <= 1e-10, "{a} vs {b}");
        }
    }
}

#[test]
fn identity_entropy_is_exact_for_any_dimension() {
    let half_log = (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    for m in 1..=40 {
        let h = entropy_of_covariance(&Matrix::identity(m)).unwrap();
        assert_eq!(h, 0.5 * m as f64 * half_log);
    }
}

/// Midpoint rule in θ with λ = λ₋ + (λ₊ − λ₋)(1 − cos θ)/2, which removes the
/// square-root endpoint singularities (and the 1/λ pole when M = T).
fn mp_mass(m: usize, t: usize, sigma2: f64, points: usize) -> f64 {
    let (lo, hi) = marchenko_pastur_support(m, t, sigma2);
    let half_width = 0.5 * (hi - lo);
    let h = std::f64::consts::PI / points as f64;
    let integrand = |theta: f64| {
        let lambda = lo + half_width * (1.0 - theta.cos());
        marchenko_pastur_density(lambda, m, t, sigma2) * half_width * theta.sin()
    };
    (0..points)
        .map(|k| integrand((k as f64 + 0.5) * h))
        .sum::<f64>()
        * h
}

#[test]
fn marchenko_pastur_integrates_to_one() {
    for (m, t) in [(10, 100), (50, 100), (100, 100), (1, 2), (3, 30)] {
        for sigma2 in [1.0, 0.37] {
            let mass = mp_mass(m, t, sigma2, 10_000);
            assert!(
                (mass - 1.0).abs() <= 1e-4,
                "M={m} T={t} σ²={sigma2}: {mass}"
            );
        }
    }
}

#[test]
fn normal_stream_moments() {
    let n = 1_000_000;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for z in standard_normal_stream(12345).take(n) {
        sum += z;
        sum_sq += z * z;
    }
    let mean = sum / n as f64;
    let var = sum_sq / n as f64 - mean * mean;
    assert!(mean.abs() < 0.01, "mean {mean}");
    assert!((var - 1.0).abs() < 0.01, "variance {var}");
}

#[test]
fn normal_stream_passes_kolmogorov_smirnov() {
    let n = 10_000;
    let mut xs: Vec<f64> = standard_normal_stream(777).take(n).collect();
    xs.sort_by(f64::total_cmp);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let cdf = normal.cdf(*x);
            (cdf - i as f64 / n as f64).max((i + 1) as f64 / n as f64 - cdf)
        })
        .fold(0.0_f64, f64::max);
    // Asymptotic 1% critical value 1.628/√n.
    assert!(d < 1.628 / (n as f64).sqrt(), "KS statistic {d}");
}

fn frobenius_error(a: &Matrix, b: &Matrix) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[test]
fn long_sample_covariance_converges() {
    let scenario = MixtureScenario {
        regimes: vec![RegimeSpec::new(100_000, vec![0.0; 2], Matrix::identity(2))],
        seed: 31,
    };
    let (data, _) = sample_scenario(&scenario).unwrap();
    let est = estimate_gaussian(&data, data.full_span()).unwrap();
    let err = frobenius_error(&est.covariance, &Matrix::identity(2));
    assert!(err <= 0.02 * 2f64.sqrt(), "Frobenius error {err}");
}

#[test]
fn regime_covariances_within_sampling_tolerance() {
    let target_a = covseg::synth::equicorrelated(4, 2.0, 0.5);
    let target_b = Matrix::diagonal(&[1.0, 3.0, 0.5, 2.0]);
    let scenario = MixtureScenario {
        regimes: vec![
            RegimeSpec::new(400, vec![1.0; 4], target_a.clone()),
            RegimeSpec::new(1200, vec![-0.5; 4], target_b.clone()),
        ],
        seed: 8,
    };
    let (data, truth) = sample_scenario(&scenario).unwrap();
    assert_eq!(truth, vec![400]);
    for (span, target) in [
        (Span::new(0, 400), target_a),
        (Span::new(400, 1600), target_b),
    ] {
        let est = estimate_gaussian(&data, span).unwrap();
        let bound = 5.0 * 4.0 / (span.len() as f64).sqrt();
        let err = frobenius_error(&est.covariance, &target);
        assert!(err <= bound, "error {err} > {bound}");
    }
}
