//! Replication harness: runs (policy × budget) grids with derived seeds,
//! records worst-case-error trajectories, and aggregates across
//! replications.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::ConfidenceConfig;
use crate::oracle::JudgeOracle;
use crate::policy::{
    run_policy, warmup_length, Allocation, PolicyKind, PolicySpec, RunContext, VarianceProfile,
    WarmupMode,
};
use crate::rng;

/// One recorded point along a run's trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checkpoint {
    pub step: u64,
    pub wce: f64,
    /// Set while some arm still has zero pulls (its estimate is 0 by
    /// convention, so the error against truth is provisional).
    pub partial: bool,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub kendall: Option<f64>,
}

/// One seeded end-to-end run: trajectory plus final allocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub checkpoints: Vec<Checkpoint>,
    pub final_allocation: Allocation,
    pub seed: u64,
}

impl TrialRecord {
    /// WCE at the final step.
    pub fn final_wce(&self) -> Option<f64> {
        self.checkpoints.last().map(|c| c.wce)
    }
}

/// Grid definition: every listed policy runs at every budget, `replications`
/// times each, with seeds derived from `master_seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub policies: Vec<PolicyKind>,
    pub budgets: Vec<u64>,
    pub replications: u32,
    pub master_seed: u64,
    pub checkpoint_every: u64,
    pub delta: f64,
    pub warmup: WarmupMode,
    /// Free-form description of the data source, echoed into the manifest.
    pub source: String,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<()> {
        if self.policies.is_empty() {
            return Err(Error::InvalidConfig("no policies requested".into()));
        }
        if self.budgets.is_empty() {
            return Err(Error::InvalidConfig("no budgets requested".into()));
        }
        if self.budgets.iter().any(|&b| b == 0) {
            return Err(Error::InvalidConfig("budgets must be >= 1".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be >= 1".into()));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::InvalidConfig("checkpoint_every must be >= 1".into()));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "delta must be in (0, 1], got {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// Stable per-replication seed: a splitmix64 fold over
    /// `(master_seed, cell tag, policy index, budget index, replication)`.
    /// Appending policies or budgets never changes existing cells' seeds.
    pub fn seed_for(&self, policy_idx: usize, budget_idx: usize, replication: u32) -> u64 {
        rng::mix(
            self.master_seed,
            &[
                rng::tag::CELL,
                policy_idx as u64,
                budget_idx as u64,
                replication as u64,
            ],
        )
    }
}

/// All replications of one (policy, budget) cell, ordered by replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRecords {
    pub policy: PolicyKind,
    pub budget: u64,
    pub records: Vec<TrialRecord>,
}

/// A cell that could not run at all (e.g. budget below the warm-up minimum).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFailure {
    pub policy: PolicyKind,
    pub budget: u64,
    pub message: String,
}

/// Mean ± std of the final WCE per cell, plus the mean trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub policy: PolicyKind,
    pub budget: u64,
    pub n_replications: u32,
    pub mean_wce: f64,
    /// Sample standard deviation over replications (divisor R−1).
    pub std_wce: f64,
    /// Set when only one replication ran (std is 0 by convention).
    pub single_replication: bool,
    /// (step, mean WCE across replications) per checkpoint.
    pub mean_curve: Vec<(u64, f64)>,
    pub final_pearson: Option<f64>,
    pub final_spearman: Option<f64>,
    pub final_kendall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub cells: Vec<CellSummary>,
}

/// Everything a grid run produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutput {
    pub cells: Vec<CellRecords>,
    pub failures: Vec<CellFailure>,
    pub report: AggregateReport,
}

/// Runs the full grid. `jobs <= 1` executes serially; larger values run
/// replications concurrently. Output is byte-identical for any `jobs`
/// because results are collected and sorted canonically before aggregation.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    oracle: &dyn JudgeOracle,
    jobs: usize,
) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let truth = oracle.ground_truth()?;
    let human = oracle.human_scores();
    let num_arms = oracle.num_arms();

    // Resolve each policy once; Robin needs the oracle's true variances.
    let mut resolved: Vec<(usize, PolicyKind)> = Vec::new();
    let robin_profile = if cfg.policies.contains(&PolicyKind::Robin) {
        Some(VarianceProfile::new(truth.variances.clone()).map_err(|e| {
            Error::InvalidConfig(format!("robin needs a usable variance profile: {e}"))
        })?)
    } else {
        None
    };
    for (i, &p) in cfg.policies.iter().enumerate() {
        resolved.push((i, p));
    }

    let spec_for = |policy: PolicyKind, budget: u64| -> Result<PolicySpec> {
        Ok(match policy {
            PolicyKind::Uniform => PolicySpec::Uniform,
            PolicyKind::Robin => PolicySpec::Robin {
                profile: robin_profile.clone().expect("resolved above"),
            },
            PolicyKind::RobinHood => PolicySpec::RobinHood {
                confidence: ConfidenceConfig::new(cfg.delta, num_arms, budget)?,
                warmup: cfg.warmup,
            },
        })
    };

    // Feasibility precheck so an infeasible cell fails once, not per
    // replication, and the rest of the grid proceeds.
    let mut failures = Vec::new();
    let mut tasks: Vec<(usize, usize)> = Vec::new();
    for &(p_idx, policy) in &resolved {
        for (b_idx, &budget) in cfg.budgets.iter().enumerate() {
            if policy == PolicyKind::RobinHood {
                let confidence = ConfidenceConfig::new(cfg.delta, num_arms, budget)?;
                let t0 = warmup_length(&confidence, cfg.warmup)?;
                if budget < t0 * num_arms as u64 {
                    let err = Error::BudgetTooSmall {
                        budget,
                        required: t0 * num_arms as u64,
                        arms: num_arms,
                        warmup: t0,
                        experimental_min: warmup_length(&confidence, WarmupMode::Experimental)?
                            * num_arms as u64,
                        theory_min: warmup_length(&confidence, WarmupMode::Theory)?
                            * num_arms as u64,
                    };
                    failures.push(CellFailure {
                        policy,
                        budget,
                        message: err.to_string(),
                    });
                    continue;
                }
            }
            tasks.push((p_idx, b_idx));
        }
    }

    let run_one = |p_idx: usize, b_idx: usize, rep: u32| -> Result<TrialRecord> {
        let policy = cfg.policies[p_idx];
        let budget = cfg.budgets[b_idx];
        let spec = spec_for(policy, budget)?;
        let ctx = RunContext {
            checkpoint_every: cfg.checkpoint_every,
            truth: Some(&truth.means),
            human: human.as_deref(),
        };
        let seed = cfg.seed_for(p_idx, b_idx, rep);
        let (_, record) = run_policy(&spec, oracle, budget, seed, &ctx)?;
        Ok(record)
    };

    // Flatten (cell, replication) and execute; canonical order restored after.
    let mut grid: Vec<(usize, usize, u32)> = Vec::new();
    for &(p_idx, b_idx) in &tasks {
        for rep in 0..cfg.replications {
            grid.push((p_idx, b_idx, rep));
        }
    }

    let results: Vec<((usize, usize, u32), Result<TrialRecord>)> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| {
            grid.par_iter()
                .map(|&(p, b, r)| ((p, b, r), run_one(p, b, r)))
                .collect()
        })
    } else {
        grid.iter()
            .map(|&(p, b, r)| ((p, b, r), run_one(p, b, r)))
            .collect()
    };

    let mut by_cell: Vec<Vec<TrialRecord>> = vec![Vec::new(); tasks.len()];
    let mut sorted = results;
    sorted.sort_by_key(|&((p, b, r), _)| (p, b, r));
    for ((p, b, _), res) in sorted {
        let record = res?;
        let slot = tasks
            .iter()
            .position(|&(tp, tb)| (tp, tb) == (p, b))
            .expect("task exists");
        by_cell[slot].push(record);
    }

    let cells: Vec<CellRecords> = tasks
        .iter()
        .zip(by_cell)
        .map(|(&(p_idx, b_idx), records)| CellRecords {
            policy: cfg.policies[p_idx],
            budget: cfg.budgets[b_idx],
            records,
        })
        .collect();

    let report = aggregate(&cells)?;
    Ok(ExperimentOutput {
        cells,
        failures,
        report,
    })
}

/// Sample mean and standard deviation (divisor R−1) of the final WCE per
/// cell, plus the per-checkpoint mean curve.
pub fn aggregate(cells: &[CellRecords]) -> Result<AggregateReport> {
    let mut summaries = Vec::with_capacity(cells.len());
    for cell in cells {
        if cell.records.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "cell ({}, {}) has no records",
                cell.policy, cell.budget
            )));
        }
        let finals: Vec<f64> = cell
            .records
            .iter()
            .map(|r| {
                r.final_wce().ok_or_else(|| {
                    Error::InvalidConfig("record has no checkpoints to aggregate".into())
                })
            })
            .collect::<Result<_>>()?;
        let (mean, std) = mean_std(&finals);

        let n_checkpoints = cell.records[0].checkpoints.len();
        let mut mean_curve = Vec::with_capacity(n_checkpoints);
        for i in 0..n_checkpoints {
            let step = cell.records[0].checkpoints[i].step;
            let mut sum = 0.0;
            for r in &cell.records {
                debug_assert_eq!(r.checkpoints[i].step, step);
                sum += r.checkpoints[i].wce;
            }
            mean_curve.push((step, sum / cell.records.len() as f64));
        }

        let mean_present = |get: fn(&Checkpoint) -> Option<f64>| -> Option<f64> {
            let vals: Vec<f64> = cell
                .records
                .iter()
                .filter_map(|r| r.checkpoints.last().and_then(get))
                .collect();
            if vals.is_empty() {
                None
            } else {
                Some(vals.iter().sum::<f64>() / vals.len() as f64)
            }
        };

        summaries.push(CellSummary {
            policy: cell.policy,
            budget: cell.budget,
            n_replications: cell.records.len() as u32,
            mean_wce: mean,
            std_wce: std,
            single_replication: cell.records.len() == 1,
            mean_curve,
            final_pearson: mean_present(|c| c.pearson),
            final_spearman: mean_present(|c| c.spearman),
            final_kendall: mean_present(|c| c.kendall),
        });
    }
    Ok(AggregateReport { cells: summaries })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}
