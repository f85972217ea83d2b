//! Sequential budget-allocation policies: uniform round-robin, the greedy
//! known-variance rule, and its optimistic unknown-variance counterpart.
//!
//! All three run behind [`run_policy`], which owns the per-arm RNG streams,
//! feeds observed scores into [`ArmState`]s, and records worst-case-error /
//! correlation checkpoints along the trajectory. A run is a pure function of
//! `(policy, oracle data, budget, seed)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{ucb_variance_with_log_term, ArmState, ConfidenceConfig};
use crate::experiment::{Checkpoint, TrialRecord};
use crate::metrics;
use crate::oracle::JudgeOracle;
use crate::rng;

/// Known per-arm score variances. At least one entry must be positive;
/// zero-variance arms are flagged and never pulled by the greedy rule
/// (their optimal share is zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceProfile {
    variances: Vec<f64>,
}

impl VarianceProfile {
    pub fn new(variances: Vec<f64>) -> Result<Self> {
        if variances.is_empty() {
            return Err(Error::InvalidConfig("variance profile is empty".into()));
        }
        for (i, &v) in variances.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "variance[{i}] = {v} must be finite and >= 0"
                )));
            }
        }
        if variances.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateProfile(variances.len()));
        }
        Ok(Self { variances })
    }

    pub fn len(&self) -> usize {
        self.variances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variances.is_empty()
    }

    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    /// Optimal shares `λ_i = σ_i² / Σ_j σ_j²`.
    pub fn shares(&self) -> Vec<f64> {
        let total: f64 = self.variances.iter().sum();
        self.variances.iter().map(|v| v / total).collect()
    }

    /// Arms with exactly zero variance (never pulled by the greedy rule).
    pub fn zero_variance_arms(&self) -> Vec<usize> {
        self.variances
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// How long the unknown-variance policy explores uniformly before switching
/// to adaptive allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarmupMode {
    /// `max(2, ceil(4·ln(1/δ)))` — the practical choice; short enough for
    /// realistic budgets. The adaptive phase then scales its exploration
    /// term to `ln(1/δ)` so the confidence bound is valid as soon as the
    /// warm-up completes.
    Experimental,
    /// `ceil(16·ln(4KB/δ))` — the length backing the variance-sandwich
    /// guarantee; often exceeds realistic budgets for large K.
    Theory,
    /// Caller-chosen length (≥ 1); the exploration term stays at the full
    /// `ln(4KB/δ)` scale.
    Explicit(u64),
}

/// Per-arm uniform warm-up pulls for the given mode.
pub fn warmup_length(cfg: &ConfidenceConfig, mode: WarmupMode) -> Result<u64> {
    match mode {
        WarmupMode::Experimental => Ok(((4.0 * cfg.delta_log_term()).ceil() as u64).max(2)),
        WarmupMode::Theory => Ok(((16.0 * cfg.union_log_term()).ceil() as u64).max(1)),
        WarmupMode::Explicit(t0) => {
            if t0 < 1 {
                return Err(Error::InvalidConfig(
                    "explicit warm-up must be at least 1".into(),
                ));
            }
            Ok(t0)
        }
    }
}

/// Policy identifier used in configs, CSV output and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Uniform,
    Robin,
    RobinHood,
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Uniform => "uniform",
            PolicyKind::Robin => "robin",
            PolicyKind::RobinHood => "robin-hood",
        }
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Fully resolved policy configuration for one run.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Uniform,
    Robin {
        profile: VarianceProfile,
    },
    RobinHood {
        confidence: ConfidenceConfig,
        warmup: WarmupMode,
    },
}

impl PolicySpec {
    pub fn kind(&self) -> PolicyKind {
        match self {
            PolicySpec::Uniform => PolicyKind::Uniform,
            PolicySpec::Robin { .. } => PolicyKind::Robin,
            PolicySpec::RobinHood { .. } => PolicyKind::RobinHood,
        }
    }
}

/// Final pull counts and score estimates after budget exhaustion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    pub pulls: Vec<u64>,
    /// Mean of the observed scores per arm; 0 for arms never pulled.
    pub estimates: Vec<f64>,
    pub budget: u64,
    pub policy_name: String,
    /// Arms excluded from greedy allocation because their known variance is
    /// exactly zero.
    pub zero_variance_arms: Vec<usize>,
}

// ---------------------------------------------------------------------------
// Selection rules
// ---------------------------------------------------------------------------

/// Ranks `(ratio, pulls)` candidates: highest ratio first, ties to fewest
/// pulls, then lowest index. Returns the winning index.
fn select_by_ratio(candidates: impl Iterator<Item = (f64, u64)>) -> Option<usize> {
    let mut best: Option<(usize, f64, u64)> = None;
    for (idx, (ratio, pulls)) in candidates.enumerate() {
        let better = match best {
            None => true,
            Some((_, b_ratio, b_pulls)) => match ratio.total_cmp(&b_ratio) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => pulls < b_pulls,
            },
        };
        if better {
            best = Some((idx, ratio, pulls));
        }
    }
    best.map(|(idx, _, _)| idx)
}

fn robin_ratio(variance: f64, pulls: u64) -> f64 {
    if variance == 0.0 {
        // zero-share arms never win against any positive ratio
        0.0
    } else if pulls == 0 {
        f64::INFINITY
    } else {
        variance / pulls as f64
    }
}

/// Greedy known-variance selection: argmax `σ_i² / n_i` with `σ²/0 = +∞`;
/// ties go to fewest pulls, then lowest index.
pub fn select_arm_robin(profile: &VarianceProfile, pulls: &[u64]) -> Result<usize> {
    if pulls.len() != profile.len() {
        return Err(Error::LengthMismatch {
            left: profile.len(),
            right: pulls.len(),
        });
    }
    if profile.variances().iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateProfile(profile.len()));
    }
    Ok(select_by_ratio(
        profile
            .variances()
            .iter()
            .zip(pulls)
            .map(|(&v, &n)| (robin_ratio(v, n), n)),
    )
    .expect("profile is nonempty"))
}

/// Optimistic unknown-variance selection: argmax `UCB_i / n_i`. Any arm with
/// an infinite bound outranks all finite ratios; ties go to fewest pulls,
/// then lowest index. Every arm must have completed warm-up (≥ 1 pull).
pub fn select_arm_robin_hood(states: &[ArmState], cfg: &ConfidenceConfig) -> Result<usize> {
    select_arm_robin_hood_with_log_term(states, cfg.union_log_term())
}

fn select_arm_robin_hood_with_log_term(states: &[ArmState], log_term: f64) -> Result<usize> {
    if states.is_empty() {
        return Err(Error::InvalidConfig("no arms".into()));
    }
    for (arm, s) in states.iter().enumerate() {
        if s.pulls() == 0 {
            return Err(Error::WarmupIncomplete { arm });
        }
    }
    let mut ratios = Vec::with_capacity(states.len());
    for s in states {
        let ucb = ucb_variance_with_log_term(s, log_term)?;
        ratios.push((ucb / s.pulls() as f64, s.pulls()));
    }
    Ok(select_by_ratio(ratios.into_iter()).expect("states are nonempty"))
}

// ---------------------------------------------------------------------------
// Heap-backed runner
// ---------------------------------------------------------------------------

/// Max-heap entry ordered exactly like the selection rules: ratio
/// descending, then fewest pulls, then lowest index. An arm's ratio only
/// changes when it is pulled, so entries never go stale.
#[derive(Debug, Clone, Copy)]
struct HeapEntry {
    ratio: f64,
    pulls: u64,
    index: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ratio
            .total_cmp(&other.ratio)
            .then_with(|| other.pulls.cmp(&self.pulls))
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Final pull targets for a known-variance profile: largest-remainder
/// rounding of the shares `λ_i·B`, so every target lands in
/// `[⌊λ_i·B⌋, ⌈λ_i·B⌉]` and they sum to exactly `B`.
///
/// The unconstrained greedy (pull argmax `σ²/n` every step) tracks these
/// quotas but can drift one pull below a floor on adversarial profiles — it
/// is Adams' apportionment method, which only guarantees the ceiling side.
/// Fixing the targets up front restores the two-sided guarantee; the greedy
/// ordering is then used to sequence pulls within them.
pub fn robin_targets(profile: &VarianceProfile, budget: u64) -> Result<Vec<u64>> {
    if budget == 0 {
        return Err(Error::InvalidConfig("budget must be >= 1".into()));
    }
    let shares = profile.shares();
    let quotas: Vec<f64> = shares.iter().map(|s| s * budget as f64).collect();
    let mut targets: Vec<u64> = quotas.iter().map(|q| q.floor() as u64).collect();
    let assigned: u64 = targets.iter().sum();
    debug_assert!(assigned <= budget);
    let remainder = budget - assigned;
    // Distribute leftovers to the largest fractional parts, lowest index on
    // ties. Zero-variance arms have zero quota and never take a leftover.
    let mut order: Vec<usize> = (0..quotas.len())
        .filter(|&i| profile.variances()[i] > 0.0)
        .collect();
    order.sort_by(|&a, &b| {
        let fa = quotas[a] - quotas[a].floor();
        let fb = quotas[b] - quotas[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(remainder as usize) {
        targets[i] += 1;
    }
    debug_assert_eq!(targets.iter().sum::<u64>(), budget);
    Ok(targets)
}

/// Exact pull counts of the known-variance policy, without sampling.
/// Equal to [`robin_targets`]; exposed separately because callers usually
/// want the counts, not the rounding mechanics.
pub fn robin_pull_counts(profile: &VarianceProfile, budget: u64) -> Result<Vec<u64>> {
    robin_targets(profile, budget)
}

// ---------------------------------------------------------------------------
// Trajectory recording
// ---------------------------------------------------------------------------

/// Evaluation context for a run: how often to checkpoint, and the reference
/// vectors checkpoints are scored against. Without `truth` no trajectory is
/// recorded (e.g. remote oracles).
#[derive(Debug, Clone, Copy, Default)]
pub struct RunContext<'a> {
    /// Record a checkpoint every this many pulls (and always at the final
    /// step). Zero disables checkpointing between start and end.
    pub checkpoint_every: u64,
    pub truth: Option<&'a [f64]>,
    pub human: Option<&'a [f64]>,
}

struct Recorder<'a> {
    every: u64,
    truth: Option<&'a [f64]>,
    human: Option<&'a [f64]>,
    checkpoints: Vec<Checkpoint>,
}

impl<'a> Recorder<'a> {
    fn new(ctx: &RunContext<'a>, num_arms: usize, budget: u64) -> Result<Self> {
        if let Some(t) = ctx.truth {
            if t.len() != num_arms {
                return Err(Error::LengthMismatch {
                    left: t.len(),
                    right: num_arms,
                });
            }
        }
        if let Some(h) = ctx.human {
            if h.len() != num_arms {
                return Err(Error::LengthMismatch {
                    left: h.len(),
                    right: num_arms,
                });
            }
        }
        let every = if ctx.checkpoint_every == 0 {
            budget
        } else {
            ctx.checkpoint_every
        };
        Ok(Self {
            every,
            truth: ctx.truth,
            human: ctx.human,
            checkpoints: Vec::new(),
        })
    }

    fn record_if_due(&mut self, step: u64, budget: u64, states: &[ArmState]) {
        let Some(truth) = self.truth else { return };
        if step % self.every != 0 && step != budget {
            return;
        }
        // Unpulled arms contribute |s_i - 0| until their first pull.
        let mut wce = 0.0f64;
        let mut partial = false;
        for (s, &t) in states.iter().zip(truth) {
            partial |= s.pulls() == 0;
            wce = wce.max((t - s.mean()).abs());
        }
        let (pearson, spearman, kendall) = match self.human {
            Some(human) => {
                let estimates: Vec<f64> = states.iter().map(ArmState::mean).collect();
                (
                    metrics::pearson(&estimates, human).ok(),
                    metrics::spearman(&estimates, human).ok(),
                    metrics::kendall_tau(&estimates, human).ok(),
                )
            }
            None => (None, None, None),
        };
        self.checkpoints.push(Checkpoint {
            step,
            wce,
            partial,
            pearson,
            spearman,
            kendall,
        });
    }
}

// ---------------------------------------------------------------------------
// run_policy
// ---------------------------------------------------------------------------

/// Executes exactly `budget` oracle queries under the given policy and
/// returns the final allocation plus the checkpoint trajectory.
///
/// Each arm draws from its own RNG stream derived from `seed`, so the j-th
/// draw of arm i is the same under every policy — which is what makes
/// matched-seed comparisons (and the warm-up equivalence with the uniform
/// baseline) exact.
pub fn run_policy(
    spec: &PolicySpec,
    oracle: &dyn JudgeOracle,
    budget: u64,
    seed: u64,
    ctx: &RunContext,
) -> Result<(Allocation, TrialRecord)> {
    let num_arms = oracle.num_arms();
    if num_arms == 0 {
        return Err(Error::InvalidConfig("oracle has no arms".into()));
    }
    if budget == 0 {
        return Err(Error::InvalidConfig("budget must be >= 1".into()));
    }

    let mut streams = rng::arm_streams(seed, num_arms);
    let mut states = vec![ArmState::new(); num_arms];
    let mut recorder = Recorder::new(ctx, num_arms, budget)?;
    let mut zero_variance_arms = Vec::new();

    match spec {
        PolicySpec::Uniform => {
            for t in 1..=budget {
                let arm = ((t - 1) % num_arms as u64) as usize;
                let x = oracle.sample(arm, &mut streams[arm])?;
                states[arm].update(x)?;
                recorder.record_if_due(t, budget, &states);
            }
        }
        PolicySpec::Robin { profile } => {
            if profile.len() != num_arms {
                return Err(Error::LengthMismatch {
                    left: profile.len(),
                    right: num_arms,
                });
            }
            zero_variance_arms = profile.zero_variance_arms();
            // Greedy σ²/n ordering, constrained to the quota-exact targets:
            // an arm retires from the heap once it reaches its target.
            let targets = robin_targets(profile, budget)?;
            let mut heap = BinaryHeap::with_capacity(num_arms);
            for (i, &v) in profile.variances().iter().enumerate() {
                if targets[i] > 0 {
                    debug_assert!(v > 0.0);
                    heap.push(HeapEntry {
                        ratio: f64::INFINITY,
                        pulls: 0,
                        index: i as u32,
                    });
                }
            }
            for t in 1..=budget {
                let top = heap.pop().expect("unretired arms remain while t <= B");
                let arm = top.index as usize;
                let x = oracle.sample(arm, &mut streams[arm])?;
                states[arm].update(x)?;
                let n = states[arm].pulls();
                if n < targets[arm] {
                    heap.push(HeapEntry {
                        ratio: robin_ratio(profile.variances()[arm], n),
                        pulls: n,
                        index: top.index,
                    });
                }
                recorder.record_if_due(t, budget, &states);
            }
        }
        PolicySpec::RobinHood { confidence, warmup } => {
            if confidence.num_arms != num_arms {
                return Err(Error::InvalidConfig(format!(
                    "confidence config is for {} arms, oracle has {num_arms}",
                    confidence.num_arms
                )));
            }
            if confidence.budget != budget {
                return Err(Error::InvalidConfig(format!(
                    "confidence config budget {} != run budget {budget}",
                    confidence.budget
                )));
            }
            let t0 = warmup_length(confidence, *warmup)?;
            let required = t0 * num_arms as u64;
            if budget < required {
                let experimental_min = warmup_length(confidence, WarmupMode::Experimental)?
                    * num_arms as u64;
                let theory_min =
                    warmup_length(confidence, WarmupMode::Theory)? * num_arms as u64;
                return Err(Error::BudgetTooSmall {
                    budget,
                    required,
                    arms: num_arms,
                    warmup: t0,
                    experimental_min,
                    theory_min,
                });
            }
            // The exploration term is matched to the warm-up: the practical
            // warm-up of ceil(4·ln(1/δ)) pulls makes the denominator
            // 1 − sqrt(4·ln(1/δ)/n) valid right away, while the theory-length
            // warm-up supports the full union-bound term.
            let log_term = match warmup {
                WarmupMode::Experimental => confidence.delta_log_term(),
                WarmupMode::Theory | WarmupMode::Explicit(_) => confidence.union_log_term(),
            };

            let mut t = 0u64;
            'warmup: for _pass in 0..t0 {
                for arm in 0..num_arms {
                    if t == budget {
                        break 'warmup;
                    }
                    t += 1;
                    let x = oracle.sample(arm, &mut streams[arm])?;
                    states[arm].update(x)?;
                    recorder.record_if_due(t, budget, &states);
                }
            }

            let mut heap = BinaryHeap::with_capacity(num_arms);
            for (i, s) in states.iter().enumerate() {
                let ucb = ucb_variance_with_log_term(s, log_term)?;
                heap.push(HeapEntry {
                    ratio: ucb / s.pulls() as f64,
                    pulls: s.pulls(),
                    index: i as u32,
                });
            }
            while t < budget {
                t += 1;
                let top = heap.pop().expect("heap holds every arm");
                let arm = top.index as usize;
                let x = oracle.sample(arm, &mut streams[arm])?;
                states[arm].update(x)?;
                let ucb = ucb_variance_with_log_term(&states[arm], log_term)?;
                heap.push(HeapEntry {
                    ratio: ucb / states[arm].pulls() as f64,
                    pulls: states[arm].pulls(),
                    index: top.index,
                });
                recorder.record_if_due(t, budget, &states);
            }
        }
    }

    let pulls: Vec<u64> = states.iter().map(ArmState::pulls).collect();
    debug_assert_eq!(pulls.iter().sum::<u64>(), budget);
    let allocation = Allocation {
        pulls,
        estimates: states.iter().map(ArmState::mean).collect(),
        budget,
        policy_name: spec.kind().name().to_string(),
        zero_variance_arms,
    };
    let record = TrialRecord {
        checkpoints: recorder.checkpoints,
        final_allocation: allocation.clone(),
        seed,
    };
    Ok((allocation, record))
}
