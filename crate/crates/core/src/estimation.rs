//! Online per-arm moment tracking and the optimistic variance estimator that
//! drives the unknown-variance policy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Running sufficient statistics for one arm: pull count, mean, and sum of
/// squared deviations (Welford's single-pass recurrence).
///
/// With zero pulls the mean and `m2` are 0 by convention.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ArmState {
    pulls: u64,
    mean: f64,
    m2: f64,
}

impl ArmState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Feeds one observed score. Rejects NaN/infinite input.
    pub fn update(&mut self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::NonFiniteScore(x));
        }
        self.pulls += 1;
        let delta = x - self.mean;
        self.mean += delta / self.pulls as f64;
        let delta2 = x - self.mean;
        // Rounding can push m2 a hair below zero on near-constant streams.
        self.m2 = (self.m2 + delta * delta2).max(0.0);
        Ok(())
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    /// Running mean; 0 by convention before the first pull.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Sum of squared deviations from the running mean.
    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// Sample variance with divisor `n` — the form used by the allocation
    /// policies.
    pub fn biased_variance(&self) -> Result<f64> {
        if self.pulls == 0 {
            return Err(Error::NoSamples);
        }
        Ok(self.m2 / self.pulls as f64)
    }

    /// Sample variance with divisor `n - 1`, the form the Gaussian
    /// concentration bound is stated for. Needs at least two pulls.
    pub fn unbiased_variance(&self) -> Result<f64> {
        if self.pulls < 2 {
            return Err(Error::TooFewSamples(self.pulls));
        }
        Ok(self.m2 / (self.pulls - 1) as f64)
    }
}

/// Failure probability and problem size driving the variance UCB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceConfig {
    /// Failure probability, in (0, 1].
    pub delta: f64,
    /// Number of arms K.
    pub num_arms: usize,
    /// Total query budget B.
    pub budget: u64,
}

impl ConfidenceConfig {
    pub fn new(delta: f64, num_arms: usize, budget: u64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "delta must be in (0, 1], got {delta}"
            )));
        }
        if num_arms == 0 {
            return Err(Error::InvalidConfig("num_arms must be >= 1".into()));
        }
        if budget == 0 {
            return Err(Error::InvalidConfig("budget must be >= 1".into()));
        }
        Ok(Self {
            delta,
            num_arms,
            budget,
        })
    }

    /// `ln(4KB/δ)` — the union-bound log term in the UCB denominator.
    pub fn union_log_term(&self) -> f64 {
        (4.0 * self.num_arms as f64 * self.budget as f64 / self.delta).ln()
    }

    /// `ln(1/δ)` — the single-check log term matching the experimental
    /// warm-up length.
    pub fn delta_log_term(&self) -> f64 {
        (1.0 / self.delta).ln()
    }
}

/// Optimistic upper confidence bound on the arm's variance:
/// `σ̂² / (1 − sqrt(4·ln(4KB/δ) / n))`, with a nonpositive denominator
/// mapped to `+∞` (maximal optimism for under-sampled arms).
///
/// Whenever finite and `σ̂² > 0`, the bound is strictly above the biased
/// variance; it shrinks toward it as pulls accumulate.
pub fn ucb_variance(state: &ArmState, cfg: &ConfidenceConfig) -> Result<f64> {
    ucb_variance_with_log_term(state, cfg.union_log_term())
}

/// Same bound with an explicit log term, used by the policy layer to keep
/// the exploration scale consistent with the chosen warm-up length.
pub fn ucb_variance_with_log_term(state: &ArmState, log_term: f64) -> Result<f64> {
    let n = state.pulls();
    if n == 0 {
        return Err(Error::NoSamples);
    }
    let denom = 1.0 - (4.0 * log_term / n as f64).sqrt();
    if denom <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(state.biased_variance()? / denom)
}
