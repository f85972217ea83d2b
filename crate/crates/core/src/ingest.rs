//! Dataset loading/validation and results persistence.
//!
//! Datasets are JSON Lines: a header object `{"score_range_max": M}`
//! followed by one object per pair
//! `{"pair_id": "...", "samples": [...], "human_score": ...}` (human score
//! optional). Results are written as two CSV files plus a JSON manifest;
//! float columns carry 17 significant digits so parsed values round-trip
//! exactly and reruns are byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{ExperimentConfig, ExperimentOutput};
use crate::oracle::{NoiseKind, ScorePool, SyntheticArmSpec};
use crate::rng;

/// A validated dataset: the declared score range plus one pool per pair.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub score_range_max: f64,
    pub pairs: Vec<ScorePool>,
}

impl DatasetFile {
    pub fn new(score_range_max: f64, pairs: Vec<ScorePool>) -> Result<Self> {
        if !score_range_max.is_finite() || score_range_max < 0.0 {
            return Err(Error::Dataset(format!(
                "score_range_max must be finite and >= 0, got {score_range_max}"
            )));
        }
        if pairs.is_empty() {
            return Err(Error::Dataset("dataset has no pairs".into()));
        }
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        for p in &pairs {
            *seen.entry(p.pair_id.as_str()).or_insert(0) += 1;
        }
        let dups: Vec<&str> = seen
            .iter()
            .filter(|(_, &c)| c > 1)
            .map(|(&id, _)| id)
            .collect();
        if !dups.is_empty() {
            return Err(Error::Dataset(format!(
                "duplicate pair_ids: {}",
                dups.join(", ")
            )));
        }
        Ok(Self {
            score_range_max,
            pairs,
        })
    }

    /// True when every pair carries a human score.
    pub fn has_human_scores(&self) -> bool {
        self.pairs.iter().all(|p| p.human_score.is_some())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct HeaderLine {
    score_range_max: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PairLine {
    pair_id: String,
    samples: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    human_score: Option<f64>,
}

/// Parses and validates a JSONL dataset. Any malformed line yields a
/// diagnostic with its line number; nothing is partially loaded.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<DatasetFile> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines().enumerate();

    let header: HeaderLine = loop {
        match lines.next() {
            None => return Err(Error::Dataset(format!("{}: file is empty", path.display()))),
            Some((idx, line)) => {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                break serde_json::from_str(&line).map_err(|e| {
                    Error::Dataset(format!("line {}: bad header: {e}", idx + 1))
                })?;
            }
        }
    };

    let mut pairs = Vec::new();
    for (idx, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: PairLine = serde_json::from_str(&line)
            .map_err(|e| Error::Dataset(format!("line {}: {e}", idx + 1)))?;
        if let Some(h) = parsed.human_score {
            if !h.is_finite() {
                return Err(Error::Dataset(format!(
                    "line {}: pair {:?} has non-finite human_score",
                    idx + 1,
                    parsed.pair_id
                )));
            }
        }
        let pool = ScorePool::new(
            parsed.pair_id,
            parsed.samples,
            parsed.human_score,
            header.score_range_max,
        )
        .map_err(|e| Error::Dataset(format!("line {}: {e}", idx + 1)))?;
        pairs.push(pool);
    }
    DatasetFile::new(header.score_range_max, pairs)
}

/// Writes a dataset in the JSONL layout `load_dataset` reads.
pub fn save_dataset(dataset: &DatasetFile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    serde_json::to_writer(
        &mut w,
        &HeaderLine {
            score_range_max: dataset.score_range_max,
        },
    )
    .map_err(|e| Error::Dataset(format!("serialize header: {e}")))?;
    w.write_all(b"\n").map_err(io_err)?;
    for p in &dataset.pairs {
        let line = PairLine {
            pair_id: p.pair_id.clone(),
            samples: p.samples.clone(),
            human_score: p.human_score,
        };
        serde_json::to_writer(&mut w, &line)
            .map_err(|e| Error::Dataset(format!("serialize pair {:?}: {e}", p.pair_id)))?;
        w.write_all(b"\n").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Builds a replay dataset by drawing `samples_per_arm` seeded scores per
/// synthetic arm. The human score column carries each arm's true mean so
/// correlation trajectories stay meaningful on generated data.
///
/// All generated samples must be nonnegative (bounded noise kinds guarantee
/// this by construction; plain Gaussian arms must keep their mass well above
/// zero or generation fails).
pub fn gen_synthetic(
    specs: &[SyntheticArmSpec],
    samples_per_arm: usize,
    seed: u64,
) -> Result<DatasetFile> {
    if specs.is_empty() {
        return Err(Error::InvalidConfig("no synthetic arm specs".into()));
    }
    if samples_per_arm == 0 {
        return Err(Error::InvalidConfig("samples_per_arm must be >= 1".into()));
    }
    let width = (specs.len() as f64).log10().ceil().max(1.0) as usize;

    let mut range_max = 0.0f64;
    let mut all_samples: Vec<Vec<f64>> = Vec::with_capacity(specs.len());
    for (arm, spec) in specs.iter().enumerate() {
        let mut stream = rng::stream(seed, &[rng::tag::DATASET, arm as u64]);
        let mut samples = Vec::with_capacity(samples_per_arm);
        for _ in 0..samples_per_arm {
            let x = draw(spec, &mut stream);
            if x < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "arm {arm} produced negative sample {x}; scores live in [0, M] — \
                     use a bounded noise kind or shift the mean"
                )));
            }
            range_max = range_max.max(x);
            samples.push(x);
        }
        match spec.noise_kind {
            NoiseKind::TruncatedGaussian { hi, .. } | NoiseKind::Uniform { hi, .. } => {
                range_max = range_max.max(hi);
            }
            NoiseKind::Gaussian => {}
        }
        all_samples.push(samples);
    }

    let pairs: Vec<ScorePool> = specs
        .iter()
        .zip(all_samples)
        .enumerate()
        .map(|(arm, (spec, samples))| {
            ScorePool::new(
                format!("arm-{arm:0width$}"),
                samples,
                Some(spec.true_mean),
                range_max,
            )
        })
        .collect::<Result<_>>()?;
    DatasetFile::new(range_max, pairs)
}

fn draw(spec: &SyntheticArmSpec, rng: &mut dyn RngCore) -> f64 {
    // Route through a one-arm synthetic oracle so pools and live synthetic
    // runs share a single sampling path.
    use crate::oracle::{JudgeOracle, SyntheticOracle};
    SyntheticOracle::new(vec![*spec])
        .expect("one valid spec")
        .sample(0, rng)
        .expect("arm 0")
}

// ---------------------------------------------------------------------------
// Results persistence
// ---------------------------------------------------------------------------

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

#[derive(Debug, Serialize)]
struct ManifestCell {
    policy: String,
    budget: u64,
    seeds: Vec<u64>,
}

#[derive(Debug, Serialize)]
struct ManifestFailure {
    policy: String,
    budget: u64,
    error: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    code_version: &'static str,
    config: &'a ExperimentConfig,
    seed_derivation: &'static str,
    cells: Vec<ManifestCell>,
    failures: Vec<ManifestFailure>,
}

/// Writes `trajectories.csv`, `summary.csv` and `manifest.json` into `dir`.
/// Rows are ordered canonically (cell order, then replication, then step),
/// so identical runs produce identical bytes.
pub fn save_results(
    dir: impl AsRef<Path>,
    cfg: &ExperimentConfig,
    output: &ExperimentOutput,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let traj_path = dir.join("trajectories.csv");
    {
        let file = fs::File::create(&traj_path).map_err(|e| Error::io(&traj_path, e))?;
        let mut w = BufWriter::new(file);
        let io_err = |e| Error::io(&traj_path, e);
        w.write_all(b"policy,budget,replication,step,wce,pearson,spearman,kendall\n")
            .map_err(io_err)?;
        for cell in &output.cells {
            for (rep, record) in cell.records.iter().enumerate() {
                for c in &record.checkpoints {
                    writeln!(
                        w,
                        "{},{},{},{},{},{},{},{}",
                        cell.policy,
                        cell.budget,
                        rep,
                        c.step,
                        format_float(c.wce),
                        format_opt(c.pearson),
                        format_opt(c.spearman),
                        format_opt(c.kendall),
                    )
                    .map_err(io_err)?;
                }
            }
        }
        w.flush().map_err(io_err)?;
    }

    let summary_path = dir.join("summary.csv");
    {
        let file = fs::File::create(&summary_path).map_err(|e| Error::io(&summary_path, e))?;
        let mut w = BufWriter::new(file);
        let io_err = |e| Error::io(&summary_path, e);
        w.write_all(b"policy,budget,mean_wce,std_wce,n_replications\n")
            .map_err(io_err)?;
        for s in &output.report.cells {
            writeln!(
                w,
                "{},{},{},{},{}",
                s.policy,
                s.budget,
                format_float(s.mean_wce),
                format_float(s.std_wce),
                s.n_replications
            )
            .map_err(io_err)?;
        }
        w.flush().map_err(io_err)?;
    }

    let manifest_path = dir.join("manifest.json");
    {
        let manifest = Manifest {
            code_version: env!("CARGO_PKG_VERSION"),
            config: cfg,
            seed_derivation:
                "splitmix64 fold over (master_seed, cell tag, policy index, budget index, replication)",
            cells: output
                .cells
                .iter()
                .map(|c| ManifestCell {
                    policy: c.policy.name().to_string(),
                    budget: c.budget,
                    seeds: c.records.iter().map(|r| r.seed).collect(),
                })
                .collect(),
            failures: output
                .failures
                .iter()
                .map(|f| ManifestFailure {
                    policy: f.policy.name().to_string(),
                    budget: f.budget,
                    error: f.message.clone(),
                })
                .collect(),
        };
        let file = fs::File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let mut w = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut w, &manifest)
            .map_err(|e| Error::Results(format!("serialize manifest: {e}")))?;
        w.write_all(b"\n").map_err(|e| Error::io(&manifest_path, e))?;
        w.flush().map_err(|e| Error::io(&manifest_path, e))?;
    }

    Ok(vec![traj_path, summary_path, manifest_path])
}

/// One parsed `trajectories.csv` row.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub policy: String,
    pub budget: u64,
    pub replication: u32,
    pub step: u64,
    pub wce: f64,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
    pub kendall: Option<f64>,
}

/// One parsed `summary.csv` row.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub policy: String,
    pub budget: u64,
    pub mean_wce: f64,
    pub std_wce: f64,
    pub n_replications: u32,
}

fn split_csv_line(line: &str, expected: usize, path: &Path, lineno: usize) -> Result<Vec<String>> {
    let fields: Vec<String> = line.split(',').map(str::to_string).collect();
    if fields.len() != expected {
        return Err(Error::Results(format!(
            "{}: line {lineno}: expected {expected} fields, got {}",
            path.display(),
            fields.len()
        )));
    }
    Ok(fields)
}

fn parse_field<T: std::str::FromStr>(s: &str, what: &str, path: &Path, lineno: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| {
        Error::Results(format!(
            "{}: line {lineno}: bad {what} {s:?}: {e}",
            path.display()
        ))
    })
}

fn parse_opt(s: &str, what: &str, path: &Path, lineno: usize) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_field(s, what, path, lineno).map(Some)
    }
}

pub fn load_trajectories(path: impl AsRef<Path>) -> Result<Vec<TrajectoryRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == "policy,budget,replication,step,wce,pearson,spearman,kendall" => {}
        other => {
            return Err(Error::Results(format!(
                "{}: unexpected trajectories header: {:?}",
                path.display(),
                other.map(|(_, h)| h)
            )))
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let f = split_csv_line(line, 8, path, lineno)?;
        rows.push(TrajectoryRow {
            policy: f[0].clone(),
            budget: parse_field(&f[1], "budget", path, lineno)?,
            replication: parse_field(&f[2], "replication", path, lineno)?,
            step: parse_field(&f[3], "step", path, lineno)?,
            wce: parse_field(&f[4], "wce", path, lineno)?,
            pearson: parse_opt(&f[5], "pearson", path, lineno)?,
            spearman: parse_opt(&f[6], "spearman", path, lineno)?,
            kendall: parse_opt(&f[7], "kendall", path, lineno)?,
        });
    }
    Ok(rows)
}

pub fn load_summary(path: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == "policy,budget,mean_wce,std_wce,n_replications" => {}
        other => {
            return Err(Error::Results(format!(
                "{}: unexpected summary header: {:?}",
                path.display(),
                other.map(|(_, h)| h)
            )))
        }
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let f = split_csv_line(line, 5, path, lineno)?;
        rows.push(SummaryRow {
            policy: f[0].clone(),
            budget: parse_field(&f[1], "budget", path, lineno)?,
            mean_wce: parse_field(&f[2], "mean_wce", path, lineno)?,
            std_wce: parse_field(&f[3], "std_wce", path, lineno)?,
            n_replications: parse_field(&f[4], "n_replications", path, lineno)?,
        });
    }
    Ok(rows)
}

/// Recomputes a summary from trajectory rows (final step per replication,
/// mean and sample std per cell, cells in first-appearance order).
pub fn summarize_trajectories(rows: &[TrajectoryRow]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, u64)> = Vec::new();
    let mut finals: BTreeMap<(String, u64), BTreeMap<u32, (u64, f64)>> = BTreeMap::new();
    for r in rows {
        let key = (r.policy.clone(), r.budget);
        if !order.contains(&key) {
            order.push(key.clone());
        }
        let per_rep = finals.entry(key).or_default();
        let entry = per_rep.entry(r.replication).or_insert((r.step, r.wce));
        if r.step >= entry.0 {
            *entry = (r.step, r.wce);
        }
    }
    order
        .into_iter()
        .map(|key| {
            let per_rep = &finals[&key];
            let values: Vec<f64> = per_rep.values().map(|&(_, w)| w).collect();
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let std = if values.len() < 2 {
                0.0
            } else {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            };
            SummaryRow {
                policy: key.0,
                budget: key.1,
                mean_wce: mean,
                std_wce: std,
                n_replications: values.len() as u32,
            }
        })
        .collect()
}

/// Mean-WCE-per-step curves per cell, suitable for plotting.
pub fn mean_curves(rows: &[TrajectoryRow]) -> Vec<(String, u64, Vec<(u64, f64)>)> {
    let mut order: Vec<(String, u64)> = Vec::new();
    let mut acc: BTreeMap<(String, u64), BTreeMap<u64, (f64, u32)>> = BTreeMap::new();
    for r in rows {
        let key = (r.policy.clone(), r.budget);
        if !order.contains(&key) {
            order.push(key.clone());
        }
        let per_step = acc.entry(key).or_default();
        let e = per_step.entry(r.step).or_insert((0.0, 0));
        e.0 += r.wce;
        e.1 += 1;
    }
    order
        .into_iter()
        .map(|key| {
            let curve = acc[&key]
                .iter()
                .map(|(&step, &(sum, n))| (step, sum / n as f64))
                .collect();
            (key.0.clone(), key.1, curve)
        })
        .collect()
}
