use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use slicelab_bench::{realized, CATALOG};
use slicelab_core::{analyze, check_relation, equivalence_key, morse_table, CobordismQuery};

fn catalog(c: &mut Criterion) {
    let mut g = c.benchmark_group("catalog");
    for text in CATALOG {
        let d = realized(text);
        g.bench_with_input(BenchmarkId::new("realize", text), text, |b, t| b.iter(|| realized(black_box(t))));
        g.bench_with_input(BenchmarkId::new("key", text), &d, |b, d| b.iter(|| equivalence_key(black_box(d)).unwrap()));
        g.bench_with_input(BenchmarkId::new("morse_table", text), &d, |b, d| b.iter(|| morse_table(black_box(d)).unwrap()));
        g.bench_with_input(BenchmarkId::new("analyze", text), &d, |b, d| b.iter(|| analyze(black_box(d), true).unwrap()));
    }
    g.finish();
}

fn relation(c: &mut Criterion) {
    let q = CobordismQuery::new(realized("8+(2)"), realized("C(+,-,+;1,2,2)"), false);
    c.bench_function("relation/8+ vs caterpillar", |b| b.iter(|| check_relation(black_box(&q)).unwrap()));
}

criterion_group!(benches, catalog, relation);
criterion_main!(benches);
