//! Variance-adaptive allocation of a fixed query budget across K items
//! scored by a stochastic judge.
//!
//! Querying a noisy judge (an LLM, a crowd worker, a flaky sensor) several
//! times per item sharpens each mean-score estimate, but the noise level
//! differs wildly across items. Given a total budget of `B` queries, uniform
//! allocation wastes samples on easy items while under-sampling hard ones.
//! This crate implements three sequential allocation policies behind one
//! select/observe interface:
//!
//! * **Uniform** — round-robin baseline.
//! * **Robin** — greedy known-variance rule: pull the arm maximizing
//!   `σ_i² / n_i`. Its final pull counts provably track the variance-
//!   proportional shares `λ_i = σ_i² / Σ σ_j²` within floor/ceil.
//! * **RobinHood** — unknown-variance rule: uniform warm-up, then pull the
//!   arm maximizing `UCB_i / n_i` where `UCB_i` is an optimistic
//!   high-probability upper bound on `σ_i²`.
//!
//! Around the policies sit the pieces needed to evaluate them end to end:
//! online moment tracking ([`estimation`]), judge oracles that replay score
//! pools, sample synthetic distributions, or call a remote service
//! ([`oracle`]), worst-case-error and rank-correlation metrics ([`metrics`]),
//! a seeded replication harness ([`experiment`]), and dataset/result
//! persistence ([`ingest`]).
//!
//! Everything is deterministic given a master seed: RNG streams are derived
//! per (replication, arm) so runs are reproducible byte for byte and
//! parallelizable across replications.

pub mod error;
pub mod estimation;
pub mod experiment;
pub mod ingest;
pub mod metrics;
pub mod oracle;
pub mod policy;
pub mod rng;

pub use error::{Error, Result};
pub use estimation::{ArmState, ConfidenceConfig};
pub use experiment::{
    AggregateReport, CellFailure, CellSummary, Checkpoint, ExperimentConfig, ExperimentOutput,
    TrialRecord,
};
pub use ingest::DatasetFile;
pub use metrics::ErrorReport;
pub use oracle::{
    JudgeOracle, NoiseKind, RemoteConfig, RemoteJudgeOracle, ReplayOracle, ScorePool,
    SyntheticArmSpec, SyntheticOracle,
};
pub use policy::{Allocation, PolicyKind, PolicySpec, RunContext, VarianceProfile, WarmupMode};
