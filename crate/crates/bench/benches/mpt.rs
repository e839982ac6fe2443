use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hdmt_bench::desk_data;
use hdmt_core::combine::{self, Combiner};
use hdmt_core::{mpt, MptConfig, SeedPolicy};
use std::hint::black_box;

fn full_test(c: &mut Criterion) {
    let mut group = c.benchmark_group("mpt");
    group.sample_size(10);
    let data = desk_data(40, 100, 0.0, 5);
    for m in [10, 40] {
        let cfg = MptConfig {
            m,
            parallel: false,
            ..MptConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(m), &cfg, |b, cfg| {
            b.iter(|| mpt(black_box(&data), cfg, &mut SeedPolicy::new(1).rng(0, 0)).unwrap())
        });
    }
    group.finish();
}

fn combination(c: &mut Criterion) {
    let pvals: Vec<f64> = (1..=40).map(|k| k as f64 / 41.0).collect();
    c.bench_function("cauchy_combination_m40", |b| {
        b.iter(|| combine::combine(Combiner::Cauchy, black_box(&pvals), 0.05).unwrap())
    });
    c.bench_function("mpt_decision_m40", |b| {
        b.iter(|| {
            hdmt_core::mpt::decide(
                black_box(&pvals),
                combine::RhoMethod::Quantile,
                0.05,
                Default::default(),
                None,
            )
            .unwrap()
        })
    });
}

criterion_group!(benches, full_test, combination);
criterion_main!(benches);
