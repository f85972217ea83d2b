//! Benchmark-only crate; see `benches/`.

/// Heterogeneous variance profile used across benchmarks: a low-variance
/// bulk with a high-variance tail, like judge-score pools in the wild.
pub fn skewed_variances(num_arms: usize) -> Vec<f64> {
    (0..num_arms)
        .map(|i| {
            let u = (i as f64 + 0.5) / num_arms as f64;
            0.05 + 2.0 * u.powi(4)
        })
        .collect()
}
