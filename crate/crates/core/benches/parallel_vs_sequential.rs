//! Data-parallel workloads run on a one-thread pool and on the full pool.
//! Build with `--no-default-features` to benchmark the sequential fallback.

use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use samplan::experiment::{eval_estimates, eval_heuristic_over_fss};
use samplan::oracle::enumerate_forward;
use samplan::par;
use samplan::refinery::SuccessorGraph;
use samplan::sampler::{generate, SamplerConfig};
use samplan::sas::{PartialState, Task};
use samplan::search::Heuristic;

fn task(name: &str) -> Task {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "tasks", &format!("{name}.sas")]
        .iter()
        .collect();
    Task::from_file(path).expect("bundled task")
}

fn modes() -> Vec<(&'static str, usize)> {
    let all = std::thread::available_parallelism().map_or(1, |n| n.get());
    vec![("sequential", 1), ("parallel", all)]
}

fn sui_graph(c: &mut Criterion) {
    let t = task("blocks-6");
    let samples = generate(
        &t,
        &SamplerConfig {
            num_samples: 3000,
            ..SamplerConfig::default()
        },
    )
    .expect("samples");
    let states: Vec<PartialState> = samples.samples.iter().map(|s| s.state.clone()).collect();
    let mut group = c.benchmark_group("sui_graph_build");
    for (name, jobs) in modes() {
        group.bench_with_input(BenchmarkId::new(name, jobs), &jobs, |b, &jobs| {
            b.iter(|| par::with_jobs(jobs, || SuccessorGraph::build(&states, &t)))
        });
    }
    group.finish();
}

fn seed_sweep(c: &mut Criterion) {
    let t = task("blocks-5");
    let seeds: Vec<u64> = (1..=8).collect();
    let mut group = c.benchmark_group("sampling_seed_sweep");
    group.sample_size(20);
    for (name, jobs) in modes() {
        group.bench_with_input(BenchmarkId::new(name, jobs), &jobs, |b, &jobs| {
            b.iter(|| {
                par::with_jobs(jobs, || {
                    par::map(&seeds, |&seed| {
                        generate(
                            &t,
                            &SamplerConfig {
                                num_samples: 2000,
                                seed,
                                ..SamplerConfig::default()
                            },
                        )
                        .map(|s| s.samples.len())
                    })
                })
            })
        });
    }
    group.finish();
}

fn fss_evaluation(c: &mut Criterion) {
    let t = task("blocks-6");
    let space = enumerate_forward(&t, 100_000).expect("enumerable");
    let mut group = c.benchmark_group("fss_goalcount_error");
    for (name, jobs) in modes() {
        group.bench_with_input(BenchmarkId::new(name, jobs), &jobs, |b, &jobs| {
            b.iter(|| par::with_jobs(jobs, || eval_heuristic_over_fss(&t, Heuristic::GoalCount, &space)))
        });
    }
    group.finish();
}

fn batch_estimate_evaluation(c: &mut Criterion) {
    let t = task("blocks-5");
    let set = generate(
        &t,
        &SamplerConfig {
            num_samples: 500,
            ..SamplerConfig::default()
        },
    )
    .expect("samples");
    // complete states force the forward-search fallback
    let mut rng = samplan::seeds::rng(1);
    let completer = samplan::refinery::Completer::new(&t, None);
    let complete: Vec<_> = set
        .samples
        .iter()
        .map(|s| {
            completer
                .complete(s, samplan::refinery::CompletionStrategy::Mutex, &mut rng)
                .expect("completion")
                .sample
        })
        .collect();
    let mut group = c.benchmark_group("sample_error_forward_search");
    group.sample_size(10);
    for (name, jobs) in modes() {
        group.bench_with_input(BenchmarkId::new(name, jobs), &jobs, |b, &jobs| {
            b.iter(|| par::with_jobs(jobs, || eval_estimates(&t, &complete, None)))
        });
    }
    group.finish();
}

criterion_group!(benches, sui_graph, seed_sweep, fss_evaluation, batch_estimate_evaluation);
criterion_main!(benches);
