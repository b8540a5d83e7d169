use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use structgen::codec::linearize;
use structgen::decoder::{constrained_decode, sequence_nll, DecodeConfig};
use structgen::scorers::{OracleScorer, RandomScorer};
use structgen_bench::{input, records, schema};

fn decode(c: &mut Criterion) {
    let schema = schema();
    let input = input();
    let target = linearize(&records(), Some(&schema)).unwrap();
    let oracle = OracleScorer::for_input(&target, 0.1, &schema, &input).unwrap();

    let mut group = c.benchmark_group("oracle_decode");
    group.bench_function("greedy", |b| {
        b.iter(|| constrained_decode(&oracle, black_box(&input), &schema, &DecodeConfig::greedy()).unwrap())
    });
    for width in [2, 4, 8] {
        group.bench_with_input(BenchmarkId::new("beam", width), &width, |b, &w| {
            b.iter(|| constrained_decode(&oracle, black_box(&input), &schema, &DecodeConfig::beam(w)).unwrap())
        });
    }
    group.finish();

    let random = RandomScorer::new(11, &schema);
    c.bench_function("random_decode_greedy", |b| {
        b.iter(|| constrained_decode(&random, black_box(&input), &schema, &DecodeConfig::greedy().with_max_length(1024)))
    });
    c.bench_function("sequence_nll", |b| b.iter(|| sequence_nll(&oracle, black_box(&input), &target).unwrap()));
}

criterion_group!(benches, decode);
criterion_main!(benches);
