use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use judgeopt::estimation::ConfidenceConfig;
use judgeopt::oracle::{SyntheticArmSpec, SyntheticOracle};
use judgeopt::policy::{
    robin_pull_counts, run_policy, PolicySpec, RunContext, VarianceProfile, WarmupMode,
};
use judgeopt_bench::skewed_variances;

fn oracle_for(num_arms: usize) -> SyntheticOracle {
    let specs = skewed_variances(num_arms)
        .into_iter()
        .enumerate()
        .map(|(i, v)| SyntheticArmSpec::gaussian(2.0 + (i % 3) as f64 * 0.5, v).unwrap())
        .collect();
    SyntheticOracle::new(specs).unwrap()
}

fn bench_robin_counts(c: &mut Criterion) {
    let mut group = c.benchmark_group("robin_pull_counts");
    for num_arms in [100usize, 1000, 10_000] {
        let profile = VarianceProfile::new(skewed_variances(num_arms)).unwrap();
        group.bench_with_input(
            BenchmarkId::from_parameter(num_arms),
            &profile,
            |b, profile| b.iter(|| robin_pull_counts(black_box(profile), 100_000).unwrap()),
        );
    }
    group.finish();
}

fn bench_policy_runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_policy_50k_steps");
    group.sample_size(10);
    let num_arms = 1000;
    let budget = 50_000u64;
    let oracle = oracle_for(num_arms);

    group.bench_function("uniform", |b| {
        b.iter(|| {
            run_policy(
                &PolicySpec::Uniform,
                black_box(&oracle),
                budget,
                7,
                &RunContext::default(),
            )
            .unwrap()
        })
    });

    let profile = VarianceProfile::new(skewed_variances(num_arms)).unwrap();
    group.bench_function("robin", |b| {
        b.iter(|| {
            run_policy(
                &PolicySpec::Robin {
                    profile: profile.clone(),
                },
                black_box(&oracle),
                budget,
                7,
                &RunContext::default(),
            )
            .unwrap()
        })
    });

    let spec = PolicySpec::RobinHood {
        confidence: ConfidenceConfig::new(0.007, num_arms, budget).unwrap(),
        warmup: WarmupMode::Experimental,
    };
    group.bench_function("robin_hood", |b| {
        b.iter(|| {
            run_policy(&spec, black_box(&oracle), budget, 7, &RunContext::default()).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, bench_robin_counts, bench_policy_runs);
criterion_main!(benches);
