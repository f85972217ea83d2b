//! Subcommand contract tests: flags, exit codes, output schemas.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_judgeopt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn judgeopt")
}

fn write_specs(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("specs.json");
    fs::write(
        &path,
        r#"[
          {"noise_kind": {"truncated_gaussian": {"base_mean": 1.2, "base_sd": 0.9, "lo": 0.0, "hi": 4.0}}},
          {"noise_kind": {"truncated_gaussian": {"base_mean": 3.0, "base_sd": 0.2, "lo": 0.0, "hi": 4.0}}},
          {"noise_kind": {"uniform": {"lo": 0.5, "hi": 3.5}}}
        ]"#,
    )
    .unwrap();
    path
}

#[test]
fn missing_out_is_usage_error_64() {
    let dir = tempfile::tempdir().unwrap();
    let specs = write_specs(dir.path());
    let out = run(&[
        "simulate",
        "--synthetic",
        specs.to_str().unwrap(),
        "--budget",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn unknown_flag_is_usage_error_64() {
    let out = run(&["allocate", "--variances", "1,2", "--budget", "5", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn help_everywhere_exits_zero() {
    for args in [
        vec!["--help"],
        vec!["simulate", "--help"],
        vec!["allocate", "--help"],
        vec!["gen-synthetic", "--help"],
        vec!["analyze", "--help"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn infeasible_robin_hood_budget_exits_2_with_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let specs = write_specs(dir.path());
    let out_dir = dir.path().join("results");
    let out = run(&[
        "simulate",
        "--synthetic",
        specs.to_str().unwrap(),
        "--policy",
        "robin-hood",
        "--budget",
        "10",
        "--delta",
        "0.007",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    // t0 = 20 at delta 0.007, 3 arms → minimum 60
    assert!(stderr.contains("minimum feasible budget is 60"), "{stderr}");
}

#[test]
fn allocate_prints_shares_and_exact_pulls() {
    let out = run(&["allocate", "--variances", "1,3", "--budget", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("0.250000"), "{stdout}");
    assert!(stdout.contains("0.750000"), "{stdout}");
    let pulls: Vec<&str> = stdout
        .lines()
        .filter(|l| l.starts_with(char::is_numeric))
        .map(|l| l.split_whitespace().last().unwrap())
        .collect();
    assert_eq!(pulls, vec!["1", "3"]);
}

#[test]
fn allocate_equal_variances_splits_evenly_and_single_arm_takes_all() {
    let out = run(&["allocate", "--variances", "2,2,2,2", "--budget", "8"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    for line in stdout.lines().filter(|l| l.starts_with(char::is_numeric)) {
        assert_eq!(line.split_whitespace().last().unwrap(), "2");
    }
    let out = run(&["allocate", "--variances", "0.5", "--budget", "17"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("total pulls: 17"));
}

#[test]
fn allocate_rejects_zero_total_variance_as_infeasible() {
    let out = run(&["allocate", "--variances", "0,0,0", "--budget", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn allocate_reads_variances_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("vars.txt");
    fs::write(&path, "1.0, 3.0\n4.0\n").unwrap();
    let out = run(&["allocate", "--variances", path.to_str().unwrap(), "--budget", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("total pulls: 8"), "{stdout}");
}

#[test]
fn gen_simulate_analyze_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let specs = write_specs(dir.path());
    let dataset = dir.path().join("pools.jsonl");
    let out = run(&[
        "gen-synthetic",
        "--spec",
        specs.to_str().unwrap(),
        "--samples-per-arm",
        "30",
        "--seed",
        "7",
        "--out",
        dataset.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{:?}", out);

    let results = dir.path().join("results");
    let out = run(&[
        "simulate",
        "--dataset",
        dataset.to_str().unwrap(),
        "--policy",
        "all",
        "--budget",
        "600",
        "--replications",
        "3",
        "--delta",
        "0.1",
        "--seed",
        "5",
        "--checkpoint-every",
        "200",
        "--out",
        results.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["trajectories.csv", "summary.csv", "manifest.json"] {
        assert!(results.join(f).is_file(), "{f} missing");
    }
    // 3 policies in the summary
    let summary = fs::read_to_string(results.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 3);

    let out = run(&[
        "analyze",
        "--results",
        results.to_str().unwrap(),
        "--dataset",
        dataset.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("human scores present"), "{stdout}");
    assert!(results.join("curves.csv").is_file());
}

#[test]
fn analyze_reports_absent_correlations_when_no_human_scores() {
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("pools.jsonl");
    fs::write(
        &dataset,
        "{\"score_range_max\":4}\n\
         {\"pair_id\":\"a\",\"samples\":[1.0,2.0,3.0]}\n\
         {\"pair_id\":\"b\",\"samples\":[0.5,1.5]}\n",
    )
    .unwrap();
    let results = dir.path().join("results");
    let out = run(&[
        "simulate",
        "--dataset",
        dataset.to_str().unwrap(),
        "--policy",
        "uniform",
        "--budget",
        "50",
        "--out",
        results.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    // correlation columns are empty, not zero
    let rows = fs::read_to_string(results.join("trajectories.csv")).unwrap();
    let data_line = rows.lines().nth(1).unwrap();
    assert!(data_line.ends_with(",,,"), "{data_line}");

    let out = run(&[
        "analyze",
        "--results",
        results.to_str().unwrap(),
        "--dataset",
        dataset.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("no human scores"), "{stdout}");
    assert!(stdout.contains('-'), "{stdout}");
}

#[test]
fn analyze_on_missing_results_is_runtime_error() {
    let out = run(&["analyze", "--results", "/nonexistent-results-dir"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_detects_corrupt_summary() {
    let dir = tempfile::tempdir().unwrap();
    let specs = write_specs(dir.path());
    let results = dir.path().join("results");
    let out = run(&[
        "simulate",
        "--synthetic",
        specs.to_str().unwrap(),
        "--policy",
        "uniform",
        "--budget",
        "100",
        "--out",
        results.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    // tamper with the stored mean
    let summary_path = results.join("summary.csv");
    let text = fs::read_to_string(&summary_path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let fields: Vec<&str> = lines[1].split(',').collect();
    lines[1] = format!(
        "{},{},9.9e0,{},{}",
        fields[0], fields[1], fields[3], fields[4]
    );
    fs::write(&summary_path, lines.join("\n") + "\n").unwrap();

    let out = run(&["analyze", "--results", results.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("disagrees"), "{stderr}");
}

#[test]
fn simulate_rejects_out_of_range_delta_as_usage() {
    let dir = tempfile::tempdir().unwrap();
    let specs = write_specs(dir.path());
    let out = run(&[
        "simulate",
        "--synthetic",
        specs.to_str().unwrap(),
        "--budget",
        "100",
        "--delta",
        "1.5",
        "--out",
        dir.path().join("r").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(64));
}
