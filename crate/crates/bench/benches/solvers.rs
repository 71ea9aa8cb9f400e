use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use leadsel_bench::instances;
use leadsel_core::harness::{rho_rule, RhoRule};
use leadsel_core::optimal::{
    count_configs_distributed_bound, count_configs_exhaustive, solve_exhaustive, SolverOptions,
};
use leadsel_core::protocol::Transport;
use leadsel_core::{run_episode, ProtocolConfig, Threshold};

fn exhaustive(c: &mut Criterion) {
    let mut g = c.benchmark_group("exhaustive");
    g.sample_size(10);
    for n in [8, 10] {
        let inst = instances(n, 1, 1).remove(0);
        let opts = SolverOptions::default();
        g.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, inst| {
            b.iter(|| solve_exhaustive(black_box(inst), Threshold::ZERO, &opts).unwrap())
        });
        let pruned = SolverOptions {
            prune: true,
            ..SolverOptions::default()
        };
        g.bench_with_input(BenchmarkId::new("pruned", n), &inst, |b, inst| {
            b.iter(|| solve_exhaustive(black_box(inst), Threshold::ZERO, &pruned).unwrap())
        });
    }
    g.finish();
}

fn episode(c: &mut Criterion) {
    let mut g = c.benchmark_group("episode");
    for n in [7, 12] {
        let inst = instances(n, 1, 2).remove(0);
        for t in [Transport::Broadcast, Transport::P2p] {
            let cfg = ProtocolConfig {
                transport: t,
                ..ProtocolConfig::new(rho_rule(&inst, RhoRule::Mean))
            };
            g.bench_with_input(BenchmarkId::new(format!("{t:?}"), n), &inst, |b, inst| {
                b.iter(|| run_episode(black_box(inst), &cfg, 7).unwrap())
            });
        }
    }
    g.finish();
}

fn counts(c: &mut Criterion) {
    c.bench_function("count_exhaustive_64", |b| {
        b.iter(|| count_configs_exhaustive(black_box(64)))
    });
    c.bench_function("count_bound_64_8", |b| {
        b.iter(|| count_configs_distributed_bound(black_box(64), black_box(8)))
    });
}

criterion_group!(benches, exhaustive, episode, counts);
criterion_main!(benches);
