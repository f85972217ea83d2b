//! Seeded statistical checks of the Gaussian variance concentration bound
//! behind the optimistic estimator: with n iid draws from N(μ, σ²) and the
//! divisor-(n−1) estimator, `|σ² − σ̂²| ≤ 2σ²·sqrt(ln(4KB/δ)/n)` fails with
//! probability at most δ/(2KB) per check.
//!
//! Grid points are chosen with comfortable z-margins so a fixed-seed run of
//! 2000 replications sees zero (or within-allowance) violations.

use judgeopt::estimation::{ArmState, ConfidenceConfig};
use judgeopt::rng;
use rand::Rng;
use rand_distr::{Distribution, Normal};

const REPLICATIONS: usize = 2000;

fn violations_at(n: usize, delta: f64, num_arms: usize, budget: u64, seed: u64) -> usize {
    let cfg = ConfidenceConfig::new(delta, num_arms, budget).unwrap();
    let sigma2: f64 = 1.7;
    let normal = Normal::new(0.3, sigma2.sqrt()).unwrap();
    let threshold = 2.0 * sigma2 * (cfg.union_log_term() / n as f64).sqrt();
    let mut violations = 0;
    for rep in 0..REPLICATIONS {
        let mut stream = rng::stream(seed, &[0xC0, rep as u64]);
        let mut acc = ArmState::new();
        for _ in 0..n {
            acc.update(normal.sample(&mut stream)).unwrap();
        }
        let est = acc.unbiased_variance().unwrap();
        if (sigma2 - est).abs() > threshold {
            violations += 1;
        }
    }
    violations
}

#[test]
fn variance_concentration_grid() {
    // (n, δ, K, B); per-check failure allowance is δ/(2KB) of 2000 reps.
    let grid: [(usize, f64, usize, u64); 3] = [
        (400, 0.05, 2, 100),
        (800, 0.2, 3, 50),
        (1000, 0.01, 5, 200),
    ];
    for (i, &(n, delta, k, b)) in grid.iter().enumerate() {
        let allowed =
            (REPLICATIONS as f64 * delta / (2.0 * k as f64 * b as f64)).floor() as usize;
        let violations = violations_at(n, delta, k, b, 0xBEEF + i as u64);
        assert!(
            violations <= allowed,
            "grid point {i} (n={n}, delta={delta}): {violations} violations > {allowed} allowed"
        );
    }
}

#[test]
fn biased_estimator_tracks_truth_at_scale() {
    // The divisor-n estimator the policies use differs from the divisor-(n−1)
    // form by σ²/n; at n = 400 both sit well inside the bound.
    let mut stream = rng::stream(0xFEED, &[1]);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut acc = ArmState::new();
    for _ in 0..400 {
        acc.update(normal.sample(&mut stream)).unwrap();
    }
    let biased = acc.biased_variance().unwrap();
    let unbiased = acc.unbiased_variance().unwrap();
    assert!((unbiased - biased * 400.0 / 399.0).abs() < 1e-12);
    assert!((biased - 1.0).abs() < 0.3);
}

#[test]
fn gaussian_stream_mean_is_calibrated() {
    // Guard on the sampling path itself: empirical mean of 10^5 draws sits
    // within 4 standard errors.
    let mut stream = rng::stream(0xFEED, &[2]);
    let normal = Normal::new(2.0, 0.5f64.sqrt()).unwrap();
    let n = 100_000;
    let mean = (0..n).map(|_| normal.sample(&mut stream)).sum::<f64>() / n as f64;
    let se = (0.5 / n as f64).sqrt();
    assert!((mean - 2.0).abs() < 4.0 * se, "mean {mean}");
}

#[test]
fn chacha_streams_are_platform_stable() {
    // Frozen draws: the whole reproducibility story rests on these not
    // changing across platforms or runs.
    let mut stream = rng::stream(42, &[rng::tag::ARM, 0]);
    let draws: Vec<u32> = (0..4).map(|_| stream.gen::<u32>()).collect();
    assert_eq!(draws, vec![1136538225, 3596739053, 2935900504, 3608604614]);
}
