use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use structgen::codec::{delinearize, linearize};
use structgen::span_index::{build_span_trie, tokenize};
use structgen_bench::{records, schema, SENTENCE};

fn codec(c: &mut Criterion) {
    let schema = schema();
    let records = records();
    let seq = linearize(&records, Some(&schema)).unwrap();

    c.bench_function("linearize", |b| b.iter(|| linearize(black_box(&records), Some(&schema)).unwrap()));
    c.bench_function("delinearize", |b| b.iter(|| delinearize(black_box(&seq), &schema).unwrap()));
    c.bench_function("tokenize", |b| b.iter(|| tokenize(black_box(SENTENCE))));
    let input = tokenize(SENTENCE);
    c.bench_function("span_trie", |b| b.iter(|| build_span_trie(black_box(&input), 16)));
}

criterion_group!(benches, codec);
criterion_main!(benches);
