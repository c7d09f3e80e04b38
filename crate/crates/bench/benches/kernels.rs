use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use siegel_core::brjuno::{brjuno_eval, TailAssumption};
use siegel_core::intervals::split_generation;
use siegel_core::siegel::linearize;
use siegel_core::{mcf_expand, parse_alpha, PrecisionCtx, RealValue};

fn silver() -> RealValue {
    parse_alpha("surd:(-1+1*sqrt(2))/1").unwrap()
}

fn expand(c: &mut Criterion) {
    let x = silver();
    let ctx = PrecisionCtx::new(256).unwrap();
    let mut g = c.benchmark_group("mcf_expand");
    for depth in [16, 64] {
        g.bench_with_input(BenchmarkId::from_parameter(depth), &depth, |b, &d| {
            b.iter(|| mcf_expand(black_box(&x), d, ctx).unwrap())
        });
    }
    g.finish();
}

fn brjuno(c: &mut Criterion) {
    let ctx = PrecisionCtx::new(256).unwrap();
    let e = mcf_expand(&silver(), 40, ctx).unwrap();
    let tail = TailAssumption::bounded(2).unwrap();
    c.bench_function("brjuno_eval/40", |b| {
        b.iter(|| brjuno_eval(black_box(&e), tail).unwrap())
    });
}

fn series(c: &mut Criterion) {
    let x = silver();
    let ctx = PrecisionCtx::new(128).unwrap();
    let mut g = c.benchmark_group("linearize");
    g.sample_size(10);
    for n in [256, 1024] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| linearize(black_box(&x), n, ctx).unwrap())
        });
    }
    g.finish();
}

fn split(c: &mut Criterion) {
    let x = parse_alpha("sym:0;[(3,+),(4,-),(2,+)];per:[(5,+)]").unwrap();
    let y = parse_alpha("sym:0;[(3,+),(4,-),(3,+)];per:[(2,+)]").unwrap();
    c.bench_function("split_generation", |b| {
        b.iter(|| split_generation(black_box(&x), black_box(&y), 16).unwrap())
    });
}

criterion_group!(benches, expand, brjuno, series, split);
criterion_main!(benches);
