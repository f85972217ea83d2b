//! Command-line driver: simulate allocation experiments, plan exact
//! known-variance allocations, generate synthetic datasets, and analyze
//! persisted results.
//!
//! Exit codes: 0 success, 64 usage error, 2 infeasible configuration
//! (e.g. a budget below the warm-up minimum), 1 runtime failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use judgeopt::error::Error as CoreError;
use judgeopt::experiment::{run_experiment, ExperimentConfig};
use judgeopt::ingest;
use judgeopt::oracle::{ReplayOracle, SyntheticArmSpec, SyntheticOracle};
use judgeopt::policy::{robin_pull_counts, PolicyKind, VarianceProfile, WarmupMode};

#[derive(Parser)]
#[command(
    name = "judgeopt",
    version,
    about = "Variance-adaptive allocation of a fixed query budget across noisily judged items"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a (policy x budget) experiment grid and persist trajectories.
    Simulate(SimulateArgs),
    /// Print the exact known-variance allocation plan, without sampling.
    Allocate(AllocateArgs),
    /// Generate a replay dataset from synthetic arm specs.
    GenSynthetic(GenSyntheticArgs),
    /// Summarize persisted results and emit plot-ready curves.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Replay dataset (JSONL) to evaluate against.
    #[arg(long, value_name = "PATH", conflicts_with = "synthetic")]
    dataset: Option<PathBuf>,
    /// Synthetic arm spec file (JSON array) to sample from.
    #[arg(long, value_name = "PATH", required_unless_present = "dataset")]
    synthetic: Option<PathBuf>,
    /// uniform | robin | robin-hood | all
    #[arg(long, default_value = "all", value_parser = parse_policies)]
    policy: PolicySelect,
    /// Query budget per run; repeatable.
    #[arg(long, required = true, value_parser = clap::value_parser!(u64).range(1..))]
    budget: Vec<u64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    replications: u32,
    /// Failure probability in (0, 1].
    #[arg(long, default_value_t = 0.05, value_parser = parse_delta)]
    delta: f64,
    /// experimental | theory | <explicit per-arm pulls>
    #[arg(long, default_value = "experimental", value_parser = parse_warmup)]
    warmup: WarmupMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    checkpoint_every: u64,
    /// Output directory for trajectories.csv, summary.csv, manifest.json.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Parallel replications; results are identical for any value.
    #[arg(long, default_value_t = 1, value_parser = parse_positive_usize)]
    jobs: usize,
}

#[derive(Args)]
struct AllocateArgs {
    /// Comma-separated variances, or a path to a file of numbers.
    #[arg(long, value_name = "LIST|PATH")]
    variances: String,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
}

#[derive(Args)]
struct GenSyntheticArgs {
    /// Synthetic arm spec file (JSON array).
    #[arg(long, value_name = "PATH")]
    spec: PathBuf,
    #[arg(long, default_value_t = 30, value_parser = parse_positive_usize)]
    samples_per_arm: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output dataset path (JSONL).
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Directory holding trajectories.csv and summary.csv from a prior run.
    #[arg(long, value_name = "DIR")]
    results: PathBuf,
    /// Dataset the run used; reported for human-score availability.
    #[arg(long, value_name = "PATH")]
    dataset: Option<PathBuf>,
}

/// Resolved `--policy` flag (single policy or `all`).
#[derive(Clone)]
struct PolicySelect(Vec<PolicyKind>);

fn parse_policies(s: &str) -> Result<PolicySelect, String> {
    match s {
        "uniform" => Ok(PolicySelect(vec![PolicyKind::Uniform])),
        "robin" => Ok(PolicySelect(vec![PolicyKind::Robin])),
        "robin-hood" => Ok(PolicySelect(vec![PolicyKind::RobinHood])),
        "all" => Ok(PolicySelect(vec![
            PolicyKind::Uniform,
            PolicyKind::Robin,
            PolicyKind::RobinHood,
        ])),
        other => Err(format!(
            "unknown policy {other:?}; expected uniform, robin, robin-hood or all"
        )),
    }
}

fn parse_positive_usize(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("not a positive integer: {e}"))?;
    if v == 0 {
        return Err("must be at least 1".into());
    }
    Ok(v)
}

fn parse_delta(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("not a number: {e}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("delta must be in (0, 1], got {v}"))
    }
}

fn parse_warmup(s: &str) -> Result<WarmupMode, String> {
    match s {
        "experimental" => Ok(WarmupMode::Experimental),
        "theory" => Ok(WarmupMode::Theory),
        other => {
            let t0: u64 = other.parse().map_err(|_| {
                format!("warmup must be experimental, theory or a positive integer, got {other:?}")
            })?;
            if t0 == 0 {
                return Err("explicit warm-up must be at least 1".into());
            }
            Ok(WarmupMode::Explicit(t0))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

/// Infeasible configurations exit 2; everything else is a runtime failure.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            match core {
                CoreError::BudgetTooSmall { .. }
                | CoreError::DegenerateProfile(_)
                | CoreError::InvalidConfig(_) => return 2,
                _ => {}
            }
        }
    }
    1
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Allocate(args) => cmd_allocate(args),
        Command::GenSynthetic(args) => cmd_gen_synthetic(args),
        Command::Analyze(args) => cmd_analyze(args),
    }
}

fn load_specs(path: &Path) -> Result<Vec<SyntheticArmSpec>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading spec file {}", path.display()))?;
    let specs: Vec<SyntheticArmSpec> = serde_json::from_str(&text)
        .with_context(|| format!("parsing spec file {}", path.display()))?;
    if specs.is_empty() {
        bail!("spec file {} lists no arms", path.display());
    }
    Ok(specs)
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let (oracle, source): (Box<dyn judgeopt::oracle::JudgeOracle>, String) =
        if let Some(path) = &args.dataset {
            let dataset = ingest::load_dataset(path)?;
            let source = format!("dataset:{}", path.display());
            (Box::new(ReplayOracle::new(dataset.pairs)?), source)
        } else {
            let path = args.synthetic.as_ref().expect("clap enforces one source");
            let specs = load_specs(path)?;
            let source = format!("synthetic:{}", path.display());
            (Box::new(SyntheticOracle::new(specs)?), source)
        };

    let cfg = ExperimentConfig {
        policies: args.policy.0,
        budgets: args.budget,
        replications: args.replications,
        master_seed: args.seed,
        checkpoint_every: args.checkpoint_every,
        delta: args.delta,
        warmup: args.warmup,
        source,
    };
    let output = run_experiment(&cfg, oracle.as_ref(), args.jobs)?;
    let files = ingest::save_results(&args.out, &cfg, &output)?;

    println!("{:<12} {:>10} {:>14} {:>14} {:>6}", "policy", "budget", "mean_wce", "std_wce", "reps");
    for cell in &output.report.cells {
        println!(
            "{:<12} {:>10} {:>14.6} {:>14.6} {:>6}",
            cell.policy.name(),
            cell.budget,
            cell.mean_wce,
            cell.std_wce,
            cell.n_replications
        );
    }
    let any_correlations = output
        .report
        .cells
        .iter()
        .any(|c| c.final_pearson.is_some());
    if any_correlations {
        println!();
        println!(
            "{:<12} {:>10} {:>10} {:>10} {:>10}",
            "policy", "budget", "pearson", "spearman", "kendall"
        );
        for cell in &output.report.cells {
            println!(
                "{:<12} {:>10} {:>10} {:>10} {:>10}",
                cell.policy.name(),
                cell.budget,
                fmt_opt(cell.final_pearson),
                fmt_opt(cell.final_spearman),
                fmt_opt(cell.final_kendall)
            );
        }
    }
    for f in files {
        println!("wrote {}", f.display());
    }

    if !output.failures.is_empty() {
        for f in &output.failures {
            eprintln!("cell ({}, {}) failed: {}", f.policy.name(), f.budget, f.message);
        }
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

fn cmd_allocate(args: AllocateArgs) -> Result<ExitCode> {
    let text = if Path::new(&args.variances).is_file() {
        fs::read_to_string(&args.variances)
            .with_context(|| format!("reading variance file {}", args.variances))?
    } else {
        args.variances.clone()
    };
    let variances: Vec<f64> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .with_context(|| format!("bad variance value {s:?}"))
        })
        .collect::<Result<_>>()?;
    if variances.is_empty() {
        bail!("no variances given");
    }
    let profile = VarianceProfile::new(variances)?;
    let pulls = robin_pull_counts(&profile, args.budget)?;
    let shares = profile.shares();

    println!("{:<6} {:>14} {:>10} {:>10}", "arm", "variance", "share", "pulls");
    for (i, ((v, s), n)) in profile
        .variances()
        .iter()
        .zip(&shares)
        .zip(&pulls)
        .enumerate()
    {
        println!("{:<6} {:>14.6} {:>10.6} {:>10}", i, v, s, n);
    }
    println!("total pulls: {}", pulls.iter().sum::<u64>());
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen_synthetic(args: GenSyntheticArgs) -> Result<ExitCode> {
    let specs = load_specs(&args.spec)?;
    let dataset = ingest::gen_synthetic(&specs, args.samples_per_arm, args.seed)?;
    ingest::save_dataset(&dataset, &args.out)?;
    println!(
        "wrote {} ({} pairs x {} samples, score range [0, {}])",
        args.out.display(),
        dataset.pairs.len(),
        args.samples_per_arm,
        dataset.score_range_max
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<ExitCode> {
    let traj_path = args.results.join("trajectories.csv");
    let summary_path = args.results.join("summary.csv");
    let rows = ingest::load_trajectories(&traj_path)?;
    if rows.is_empty() {
        bail!("{} has no data rows", traj_path.display());
    }
    let stored = ingest::load_summary(&summary_path)?;
    let recomputed = ingest::summarize_trajectories(&rows);

    if stored.len() != recomputed.len() {
        bail!(
            "summary.csv has {} cells but trajectories imply {}",
            stored.len(),
            recomputed.len()
        );
    }
    for (s, r) in stored.iter().zip(&recomputed) {
        if s.policy != r.policy
            || s.budget != r.budget
            || s.n_replications != r.n_replications
            || s.mean_wce != r.mean_wce
            || s.std_wce != r.std_wce
        {
            bail!(
                "summary.csv row ({}, {}) disagrees with recomputation from trajectories",
                s.policy,
                s.budget
            );
        }
    }

    // Final-step correlations per cell: mean over replications when present.
    #[derive(Default)]
    struct CorrAcc {
        pearson: Vec<f64>,
        spearman: Vec<f64>,
        kendall: Vec<f64>,
    }
    let mut order: Vec<(String, u64)> = Vec::new();
    let mut finals: std::collections::BTreeMap<(String, u64, u32), ingest::TrajectoryRow> =
        std::collections::BTreeMap::new();
    for r in &rows {
        let key = (r.policy.clone(), r.budget, r.replication);
        let cell_key = (r.policy.clone(), r.budget);
        if !order.contains(&cell_key) {
            order.push(cell_key);
        }
        match finals.get(&key) {
            Some(prev) if prev.step >= r.step => {}
            _ => {
                finals.insert(key, r.clone());
            }
        }
    }

    println!(
        "{:<12} {:>10} {:>14} {:>14} {:>6} {:>9} {:>9} {:>9}",
        "policy", "budget", "mean_wce", "std_wce", "reps", "pearson", "spearman", "kendall"
    );
    for (policy, budget) in &order {
        let s = recomputed
            .iter()
            .find(|s| &s.policy == policy && s.budget == *budget)
            .ok_or_else(|| anyhow!("cell ({policy}, {budget}) missing from summary"))?;
        let mut acc = CorrAcc::default();
        for row in finals
            .values()
            .filter(|r| &r.policy == policy && r.budget == *budget)
        {
            acc.pearson.extend(row.pearson);
            acc.spearman.extend(row.spearman);
            acc.kendall.extend(row.kendall);
        }
        let mean_of = |v: &[f64]| -> Option<f64> {
            if v.is_empty() {
                None
            } else {
                Some(v.iter().sum::<f64>() / v.len() as f64)
            }
        };
        println!(
            "{:<12} {:>10} {:>14.6} {:>14.6} {:>6} {:>9} {:>9} {:>9}",
            s.policy,
            s.budget,
            s.mean_wce,
            s.std_wce,
            s.n_replications,
            fmt_opt(mean_of(&acc.pearson)),
            fmt_opt(mean_of(&acc.spearman)),
            fmt_opt(mean_of(&acc.kendall)),
        );
    }

    // Plot-ready mean-WCE curves.
    let curves_path = args.results.join("curves.csv");
    {
        use std::io::Write;
        let file = fs::File::create(&curves_path)
            .with_context(|| format!("creating {}", curves_path.display()))?;
        let mut w = std::io::BufWriter::new(file);
        w.write_all(b"policy,budget,step,mean_wce\n")?;
        for (policy, budget, curve) in ingest::mean_curves(&rows) {
            for (step, mean) in curve {
                writeln!(w, "{policy},{budget},{step},{}", ingest::format_float(mean))?;
            }
        }
        w.flush()?;
    }
    println!("wrote {}", curves_path.display());

    if let Some(path) = &args.dataset {
        let dataset = ingest::load_dataset(path)?;
        if dataset.has_human_scores() {
            println!(
                "dataset {}: {} pairs, human scores present",
                path.display(),
                dataset.pairs.len()
            );
        } else {
            println!(
                "dataset {}: {} pairs, no human scores (correlations absent)",
                path.display(),
                dataset.pairs.len()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
