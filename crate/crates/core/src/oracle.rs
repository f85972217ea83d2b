//! Sources of noisy per-arm scores: empirical replay pools, synthetic
//! distributions with known ground truth, and a generic remote judge
//! adapter speaking a small JSON protocol.

use std::time::Duration;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::ArmState;

/// True per-arm moments as the harness sees them: exact parameters for
/// synthetic oracles, population pool moments for replay oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

/// Anything that can answer "give me one noisy score for arm i".
///
/// Implementations never own randomness; the caller passes the stream so
/// replications and arms stay independent and reproducible.
pub trait JudgeOracle: Sync {
    fn num_arms(&self) -> usize;

    /// One noisy score for `arm`, deterministic given the stream state.
    fn sample(&self, arm: usize, rng: &mut dyn RngCore) -> Result<f64>;

    /// Exact moments for synthetic oracles, pool moments for replay.
    /// Remote judges have no observable truth and return
    /// [`Error::Unsupported`].
    fn ground_truth(&self) -> Result<GroundTruth>;

    /// Reference (human) ratings when every arm carries one.
    fn human_scores(&self) -> Option<Vec<f64>> {
        None
    }

    fn check_arm(&self, arm: usize) -> Result<()> {
        if arm >= self.num_arms() {
            return Err(Error::ArmOutOfRange {
                arm,
                arms: self.num_arms(),
            });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Replay pools
// ---------------------------------------------------------------------------

/// A recorded set of judge scores for one pair, replayed uniformly with
/// replacement. The pool is treated as the population: its mean and biased
/// variance are the arm's ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorePool {
    pub pair_id: String,
    pub samples: Vec<f64>,
    pub human_score: Option<f64>,
    pool_mean: f64,
    pool_variance: f64,
}

impl ScorePool {
    /// Validates the samples against the declared score range `[0, max]`
    /// and caches the pool moments.
    pub fn new(
        pair_id: impl Into<String>,
        samples: Vec<f64>,
        human_score: Option<f64>,
        score_range_max: f64,
    ) -> Result<Self> {
        let pair_id = pair_id.into();
        if samples.is_empty() {
            return Err(Error::Dataset(format!("pair {pair_id:?} has no samples")));
        }
        let mut acc = ArmState::new();
        for &s in &samples {
            if !s.is_finite() {
                return Err(Error::Dataset(format!(
                    "pair {pair_id:?} has non-finite sample {s}"
                )));
            }
            if s < 0.0 || s > score_range_max {
                return Err(Error::Dataset(format!(
                    "pair {pair_id:?} sample {s} outside score range [0, {score_range_max}]"
                )));
            }
            acc.update(s)?;
        }
        let pool_mean = acc.mean();
        let pool_variance = acc.biased_variance()?;
        Ok(Self {
            pair_id,
            samples,
            human_score,
            pool_mean,
            pool_variance,
        })
    }

    pub fn pool_mean(&self) -> f64 {
        self.pool_mean
    }

    /// Biased (divisor n) variance of the pool.
    pub fn pool_variance(&self) -> f64 {
        self.pool_variance
    }
}

/// Replays score pools by uniform draws with replacement.
#[derive(Debug, Clone)]
pub struct ReplayOracle {
    pools: Vec<ScorePool>,
}

impl ReplayOracle {
    pub fn new(pools: Vec<ScorePool>) -> Result<Self> {
        if pools.is_empty() {
            return Err(Error::Dataset("replay oracle needs at least one pool".into()));
        }
        Ok(Self { pools })
    }

    pub fn pools(&self) -> &[ScorePool] {
        &self.pools
    }
}

impl JudgeOracle for ReplayOracle {
    fn num_arms(&self) -> usize {
        self.pools.len()
    }

    fn sample(&self, arm: usize, rng: &mut dyn RngCore) -> Result<f64> {
        self.check_arm(arm)?;
        let pool = &self.pools[arm].samples;
        Ok(pool[rng.gen_range(0..pool.len())])
    }

    fn ground_truth(&self) -> Result<GroundTruth> {
        Ok(GroundTruth {
            means: self.pools.iter().map(ScorePool::pool_mean).collect(),
            variances: self.pools.iter().map(ScorePool::pool_variance).collect(),
        })
    }

    fn human_scores(&self) -> Option<Vec<f64>> {
        self.pools.iter().map(|p| p.human_score).collect()
    }
}

// ---------------------------------------------------------------------------
// Synthetic arms
// ---------------------------------------------------------------------------

/// Noise families for synthetic arms. The declared arm moments are always
/// the exact moments of the sampled score, so ground truth stays honest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// Score ~ N(mean, variance).
    Gaussian,
    /// Base Gaussian rejection-sampled into `[lo, hi]`.
    TruncatedGaussian {
        base_mean: f64,
        base_sd: f64,
        lo: f64,
        hi: f64,
    },
    /// Score ~ U[lo, hi].
    Uniform { lo: f64, hi: f64 },
}

/// One synthetic arm: exact mean/variance plus the noise family realizing
/// them.
///
/// Deserialization derives the moments from the noise parameters: Gaussian
/// entries must state `true_mean`/`true_variance`, bounded kinds may omit
/// them (stated values are cross-checked against the derived ones).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArmSpecInput")]
pub struct SyntheticArmSpec {
    pub true_mean: f64,
    pub true_variance: f64,
    pub noise_kind: NoiseKind,
}

#[derive(Deserialize)]
struct ArmSpecInput {
    #[serde(default)]
    true_mean: Option<f64>,
    #[serde(default)]
    true_variance: Option<f64>,
    noise_kind: NoiseKind,
}

impl TryFrom<ArmSpecInput> for SyntheticArmSpec {
    type Error = String;

    fn try_from(input: ArmSpecInput) -> std::result::Result<Self, String> {
        let built = match input.noise_kind {
            NoiseKind::Gaussian => {
                let (Some(mean), Some(var)) = (input.true_mean, input.true_variance) else {
                    return Err(
                        "gaussian arms need explicit true_mean and true_variance".into()
                    );
                };
                SyntheticArmSpec::gaussian(mean, var)
            }
            NoiseKind::TruncatedGaussian {
                base_mean,
                base_sd,
                lo,
                hi,
            } => SyntheticArmSpec::truncated_gaussian(base_mean, base_sd, lo, hi),
            NoiseKind::Uniform { lo, hi } => SyntheticArmSpec::uniform(lo, hi),
        }
        .map_err(|e| e.to_string())?;
        let close = |stated: f64, derived: f64| {
            (stated - derived).abs() <= 1e-6 * derived.abs().max(1.0)
        };
        if let Some(m) = input.true_mean {
            if !close(m, built.true_mean) {
                return Err(format!(
                    "stated true_mean {m} disagrees with derived {}",
                    built.true_mean
                ));
            }
        }
        if let Some(v) = input.true_variance {
            if !close(v, built.true_variance) {
                return Err(format!(
                    "stated true_variance {v} disagrees with derived {}",
                    built.true_variance
                ));
            }
        }
        Ok(built)
    }
}

impl SyntheticArmSpec {
    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !variance.is_finite() || variance < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "gaussian arm needs finite mean and variance >= 0, got ({mean}, {variance})"
            )));
        }
        Ok(Self {
            true_mean: mean,
            true_variance: variance,
            noise_kind: NoiseKind::Gaussian,
        })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidConfig(format!(
                "uniform arm needs lo <= hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            true_mean: (lo + hi) / 2.0,
            true_variance: (hi - lo) * (hi - lo) / 12.0,
            noise_kind: NoiseKind::Uniform { lo, hi },
        })
    }

    /// Gaussian truncated to `[lo, hi]`; the declared moments are the exact
    /// truncated moments computed from the base parameters.
    pub fn truncated_gaussian(base_mean: f64, base_sd: f64, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidConfig(format!(
                "truncation range needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        if !(base_mean.is_finite() && base_sd.is_finite()) || base_sd < 0.0 {
            return Err(Error::InvalidConfig(
                "truncated gaussian needs finite base parameters with sd >= 0".into(),
            ));
        }
        if base_sd == 0.0 {
            if base_mean < lo || base_mean > hi {
                return Err(Error::InvalidConfig(
                    "zero-sd truncated gaussian has its mass outside the range".into(),
                ));
            }
            return Ok(Self {
                true_mean: base_mean,
                true_variance: 0.0,
                noise_kind: NoiseKind::TruncatedGaussian {
                    base_mean,
                    base_sd,
                    lo,
                    hi,
                },
            });
        }
        let (mean, var) = truncated_normal_moments(base_mean, base_sd, lo, hi)?;
        Ok(Self {
            true_mean: mean,
            true_variance: var,
            noise_kind: NoiseKind::TruncatedGaussian {
                base_mean,
                base_sd,
                lo,
                hi,
            },
        })
    }

    fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match self.noise_kind {
            NoiseKind::Gaussian => {
                if self.true_variance == 0.0 {
                    self.true_mean
                } else {
                    let normal = Normal::new(self.true_mean, self.true_variance.sqrt())
                        .expect("validated at construction");
                    normal.sample(&mut WrapRng(rng))
                }
            }
            NoiseKind::TruncatedGaussian {
                base_mean,
                base_sd,
                lo,
                hi,
            } => {
                if base_sd == 0.0 {
                    return base_mean;
                }
                let normal = Normal::new(base_mean, base_sd).expect("validated at construction");
                loop {
                    let x = normal.sample(&mut WrapRng(rng));
                    if (lo..=hi).contains(&x) {
                        return x;
                    }
                }
            }
            NoiseKind::Uniform { lo, hi } => {
                if lo == hi {
                    lo
                } else {
                    WrapRng(rng).gen_range(lo..=hi)
                }
            }
        }
    }
}

/// `&mut dyn RngCore` does not implement `Rng`; this shim restores it.
struct WrapRng<'a>(&'a mut dyn RngCore);

impl RngCore for WrapRng<'_> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

/// Exact mean and variance of N(mu, sigma²) conditioned on `[lo, hi]`.
fn truncated_normal_moments(mu: f64, sigma: f64, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let a = (lo - mu) / sigma;
    let b = (hi - mu) / sigma;
    let z = std_normal_cdf(b) - std_normal_cdf(a);
    if z <= 1e-12 {
        return Err(Error::InvalidConfig(format!(
            "truncation range [{lo}, {hi}] carries negligible mass for N({mu}, {}^2)",
            sigma
        )));
    }
    let pa = std_normal_pdf(a);
    let pb = std_normal_pdf(b);
    let mean = mu + sigma * (pa - pb) / z;
    let ratio = (pa - pb) / z;
    let var = sigma * sigma * (1.0 + (a * pa - b * pb) / z - ratio * ratio);
    Ok((mean, var.max(0.0)))
}

/// Samples synthetic arms with exactly known moments.
#[derive(Debug, Clone)]
pub struct SyntheticOracle {
    specs: Vec<SyntheticArmSpec>,
}

impl SyntheticOracle {
    pub fn new(specs: Vec<SyntheticArmSpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::InvalidConfig(
                "synthetic oracle needs at least one arm".into(),
            ));
        }
        Ok(Self { specs })
    }

    pub fn specs(&self) -> &[SyntheticArmSpec] {
        &self.specs
    }
}

impl JudgeOracle for SyntheticOracle {
    fn num_arms(&self) -> usize {
        self.specs.len()
    }

    fn sample(&self, arm: usize, rng: &mut dyn RngCore) -> Result<f64> {
        self.check_arm(arm)?;
        Ok(self.specs[arm].sample(rng))
    }

    fn ground_truth(&self) -> Result<GroundTruth> {
        Ok(GroundTruth {
            means: self.specs.iter().map(|s| s.true_mean).collect(),
            variances: self.specs.iter().map(|s| s.true_variance).collect(),
        })
    }
}

// ---------------------------------------------------------------------------
// Remote judge adapter
// ---------------------------------------------------------------------------

/// Connection settings for a remote judge service.
#[derive(Debug, Clone)]
pub struct RemoteConfig {
    /// Base URL; queries go to `POST {endpoint}/judge`.
    pub endpoint: String,
    /// Declared score scale; replies outside `[0, score_range_max]` are
    /// protocol errors.
    pub score_range_max: f64,
    pub timeout: Duration,
    /// Retries after the first attempt for transport errors and 5xx replies.
    pub max_retries: u32,
    pub initial_backoff: Duration,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        Self {
            endpoint: String::new(),
            score_range_max: 4.0,
            timeout: Duration::from_secs(30),
            max_retries: 3,
            initial_backoff: Duration::from_millis(250),
        }
    }
}

/// What gets posted per query.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JudgeRequest {
    pub pair_id: String,
    pub prompt: String,
    pub response: String,
    pub rubric: String,
}

#[derive(Debug, Deserialize)]
struct JudgeReply {
    score: f64,
}

/// Queries a judge service over HTTP: one `POST {endpoint}/judge` per
/// sample, JSON request `{pair_id, prompt, response, rubric}`, JSON reply
/// `{score}`. Transient failures (transport errors, 5xx) are retried with
/// exponential backoff; anything else is surfaced immediately.
pub struct RemoteJudgeOracle {
    cfg: RemoteConfig,
    pairs: Vec<JudgeRequest>,
    client: reqwest::blocking::Client,
}

impl RemoteJudgeOracle {
    pub fn new(cfg: RemoteConfig, pairs: Vec<JudgeRequest>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidConfig(
                "remote oracle needs at least one pair".into(),
            ));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(cfg.timeout)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("http client: {e}")))?;
        Ok(Self { cfg, pairs, client })
    }

    fn query_once(&self, arm: usize) -> std::result::Result<f64, QueryAttempt> {
        let url = format!("{}/judge", self.cfg.endpoint.trim_end_matches('/'));
        let resp = self
            .client
            .post(&url)
            .json(&self.pairs[arm])
            .send()
            .map_err(|e| QueryAttempt::Transient(e.to_string()))?;
        let status = resp.status();
        if status.is_server_error() {
            return Err(QueryAttempt::Transient(format!("status {status}")));
        }
        if !status.is_success() {
            return Err(QueryAttempt::Fatal(Error::Protocol(format!(
                "unexpected status {status}"
            ))));
        }
        let reply: JudgeReply = resp
            .json()
            .map_err(|e| QueryAttempt::Fatal(Error::Protocol(format!("bad reply: {e}"))))?;
        if !reply.score.is_finite()
            || reply.score < 0.0
            || reply.score > self.cfg.score_range_max
        {
            return Err(QueryAttempt::Fatal(Error::Protocol(format!(
                "score {} outside [0, {}]",
                reply.score, self.cfg.score_range_max
            ))));
        }
        Ok(reply.score)
    }
}

enum QueryAttempt {
    Transient(String),
    Fatal(Error),
}

impl JudgeOracle for RemoteJudgeOracle {
    fn num_arms(&self) -> usize {
        self.pairs.len()
    }

    fn sample(&self, arm: usize, _rng: &mut dyn RngCore) -> Result<f64> {
        self.check_arm(arm)?;
        let mut backoff = self.cfg.initial_backoff;
        let mut last_msg = String::new();
        let attempts = self.cfg.max_retries + 1;
        for attempt in 0..attempts {
            match self.query_once(arm) {
                Ok(score) => return Ok(score),
                Err(QueryAttempt::Fatal(e)) => return Err(e),
                Err(QueryAttempt::Transient(msg)) => {
                    last_msg = msg;
                    if attempt + 1 < attempts {
                        std::thread::sleep(backoff);
                        backoff *= 2;
                    }
                }
            }
        }
        Err(Error::QueryFailed {
            attempts,
            message: last_msg,
        })
    }

    fn ground_truth(&self) -> Result<GroundTruth> {
        Err(Error::Unsupported("remote judge has no ground truth"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn constant_pool_always_returns_it() {
        let pool = ScorePool::new("p", vec![4.0, 4.0, 4.0], None, 4.0).unwrap();
        let oracle = ReplayOracle::new(vec![pool]).unwrap();
        let mut stream = rng::stream(0, &[rng::tag::ARM, 0]);
        for _ in 0..32 {
            assert_eq!(oracle.sample(0, &mut stream).unwrap(), 4.0);
        }
    }

    #[test]
    fn zero_variance_synthetic_is_deterministic() {
        let oracle =
            SyntheticOracle::new(vec![SyntheticArmSpec::gaussian(2.0, 0.0).unwrap()]).unwrap();
        let mut stream = rng::stream(0, &[rng::tag::ARM, 0]);
        for _ in 0..16 {
            assert_eq!(oracle.sample(0, &mut stream).unwrap(), 2.0);
        }
    }

    #[test]
    fn replay_mean_converges_at_clt_scale() {
        let pool = ScorePool::new("p", vec![0.0, 4.0], None, 4.0).unwrap();
        let oracle = ReplayOracle::new(vec![pool]).unwrap();
        let mut stream = rng::stream(7, &[rng::tag::ARM, 0]);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| oracle.sample(0, &mut stream).unwrap())
            .sum::<f64>()
            / n as f64;
        // population variance 4 → 3-sigma band around 2.0
        assert!((mean - 2.0).abs() < 3.0 * (4.0 / n as f64).sqrt());
    }

    #[test]
    fn replay_draws_are_uniform_chi_square() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let samples = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let pool = ScorePool::new("p", samples, None, 4.0).unwrap();
        let oracle = ReplayOracle::new(vec![pool]).unwrap();
        let mut stream = rng::stream(13, &[rng::tag::ARM, 0]);
        let n = 100_000usize;
        let mut counts = [0u64; 5];
        for _ in 0..n {
            let v = oracle.sample(0, &mut stream).unwrap();
            counts[v as usize] += 1;
        }
        let expected = n as f64 / 5.0;
        let stat: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        let critical = ChiSquared::new(4.0).unwrap().inverse_cdf(0.999);
        assert!(stat < critical, "chi-square {stat} >= {critical}");
    }

    #[test]
    fn ground_truth_is_pool_moments() {
        let pool = ScorePool::new("p", vec![1.0, 2.0, 3.0], None, 4.0).unwrap();
        let oracle = ReplayOracle::new(vec![pool]).unwrap();
        let truth = oracle.ground_truth().unwrap();
        assert!((truth.means[0] - 2.0).abs() < 1e-12);
        assert!((truth.variances[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ground_truth_echoes_synthetic_spec() {
        let oracle =
            SyntheticOracle::new(vec![SyntheticArmSpec::gaussian(1.5, 0.25).unwrap()]).unwrap();
        let truth = oracle.ground_truth().unwrap();
        assert_eq!(truth.means, vec![1.5]);
        assert_eq!(truth.variances, vec![0.25]);
    }

    #[test]
    fn pool_rejects_out_of_range_and_empty() {
        assert!(ScorePool::new("p", vec![], None, 4.0).is_err());
        assert!(ScorePool::new("p", vec![5.0], None, 4.0).is_err());
        assert!(ScorePool::new("p", vec![-0.1], None, 4.0).is_err());
        assert!(ScorePool::new("p", vec![f64::NAN], None, 4.0).is_err());
    }

    #[test]
    fn pool_moments_match_recomputation() {
        let samples = vec![0.5, 1.25, 3.75, 2.0, 0.0, 4.0, 1.0];
        let pool = ScorePool::new("p", samples.clone(), None, 4.0).unwrap();
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        assert!((pool.pool_mean() - mean).abs() < 1e-9 * mean.abs().max(1.0));
        assert!((pool.pool_variance() - var).abs() < 1e-9 * var.max(1.0));
    }

    #[test]
    fn arm_out_of_range() {
        let oracle =
            SyntheticOracle::new(vec![SyntheticArmSpec::gaussian(0.0, 1.0).unwrap()]).unwrap();
        let mut stream = rng::stream(0, &[0]);
        assert!(matches!(
            oracle.sample(1, &mut stream),
            Err(Error::ArmOutOfRange { arm: 1, arms: 1 })
        ));
    }

    #[test]
    fn truncated_moments_match_monte_carlo() {
        let spec = SyntheticArmSpec::truncated_gaussian(2.0, 1.5, 0.0, 4.0).unwrap();
        let mut stream = rng::stream(21, &[rng::tag::ARM, 0]);
        let n = 200_000;
        let mut acc = ArmState::new();
        for _ in 0..n {
            acc.update(spec.sample(&mut stream)).unwrap();
        }
        assert!(
            (acc.mean() - spec.true_mean).abs() < 0.01,
            "mean {} vs {}",
            acc.mean(),
            spec.true_mean
        );
        let var = acc.biased_variance().unwrap();
        assert!(
            (var - spec.true_variance).abs() < 0.02,
            "var {} vs {}",
            var,
            spec.true_variance
        );
    }

    #[test]
    fn uniform_spec_moments() {
        let spec = SyntheticArmSpec::uniform(1.0, 3.0).unwrap();
        assert_eq!(spec.true_mean, 2.0);
        assert!((spec.true_variance - 4.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn human_scores_only_when_complete() {
        let a = ScorePool::new("a", vec![1.0], Some(3.0), 4.0).unwrap();
        let b = ScorePool::new("b", vec![2.0], None, 4.0).unwrap();
        let oracle = ReplayOracle::new(vec![a.clone(), b]).unwrap();
        assert_eq!(oracle.human_scores(), None);
        let c = ScorePool::new("c", vec![2.0], Some(1.0), 4.0).unwrap();
        let oracle = ReplayOracle::new(vec![a, c]).unwrap();
        assert_eq!(oracle.human_scores(), Some(vec![3.0, 1.0]));
    }

    #[test]
    fn arm_spec_serde_round_trip_and_validation() {
        let specs = vec![
            SyntheticArmSpec::gaussian(2.0, 0.5).unwrap(),
            SyntheticArmSpec::truncated_gaussian(2.0, 1.0, 0.0, 4.0).unwrap(),
            SyntheticArmSpec::uniform(1.0, 3.0).unwrap(),
        ];
        let json = serde_json::to_string(&specs).unwrap();
        let back: Vec<SyntheticArmSpec> = serde_json::from_str(&json).unwrap();
        assert_eq!(specs, back);

        // moments may be omitted for bounded kinds
        let lean: SyntheticArmSpec =
            serde_json::from_str(r#"{"noise_kind":{"uniform":{"lo":1.0,"hi":3.0}}}"#).unwrap();
        assert_eq!(lean, specs[2]);

        // gaussian without moments is rejected
        assert!(serde_json::from_str::<SyntheticArmSpec>(r#"{"noise_kind":"gaussian"}"#).is_err());
        // inconsistent stated moments are rejected
        assert!(serde_json::from_str::<SyntheticArmSpec>(
            r#"{"true_mean":9.0,"noise_kind":{"uniform":{"lo":1.0,"hi":3.0}}}"#
        )
        .is_err());
    }

    #[test]
    fn interleaved_streams_match_solo_runs() {
        let pools = vec![
            ScorePool::new("a", vec![0.0, 1.0, 2.0], None, 4.0).unwrap(),
            ScorePool::new("b", vec![3.0, 4.0], None, 4.0).unwrap(),
        ];
        let oracle = ReplayOracle::new(pools).unwrap();
        let mut s0 = rng::stream(5, &[rng::tag::ARM, 0]);
        let mut s1 = rng::stream(5, &[rng::tag::ARM, 1]);
        let mut inter = (Vec::new(), Vec::new());
        for _ in 0..50 {
            inter.0.push(oracle.sample(0, &mut s0).unwrap());
            inter.1.push(oracle.sample(1, &mut s1).unwrap());
        }
        let mut solo = rng::stream(5, &[rng::tag::ARM, 0]);
        let solo0: Vec<f64> = (0..50).map(|_| oracle.sample(0, &mut solo).unwrap()).collect();
        let mut solo = rng::stream(5, &[rng::tag::ARM, 1]);
        let solo1: Vec<f64> = (0..50).map(|_| oracle.sample(1, &mut solo).unwrap()).collect();
        assert_eq!(inter.0, solo0);
        assert_eq!(inter.1, solo1);
    }
}
