use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use mvlsw::{
    make_filter, mv_ews, rmvlsw, var_ews, AutoCorrProducts, DiscreteWaveletSystem, EstimateOptions, Family,
    InnovationGenerator,
};
use mvlsw_bench::fixture_and_draw;

fn inner_products(c: &mut Criterion) {
    let mut group = c.benchmark_group("inner_products");
    for (number, t) in [(1usize, 256usize), (1, 1024), (7, 1024)] {
        let levels = t.trailing_zeros() as usize;
        let sys = DiscreteWaveletSystem::new(make_filter(Family::DaubExPhase, number).unwrap(), levels).unwrap();
        group.bench_with_input(BenchmarkId::new(format!("D{number}"), t), &t, |b, &t| {
            b.iter(|| AutoCorrProducts::new(black_box(&sys), t).unwrap())
        });
    }
    group.finish();
}

fn estimate(c: &mut Criterion) {
    let mut group = c.benchmark_group("mv_ews");
    for t in [256, 1024] {
        let (_, x) = fixture_and_draw(t, 1);
        let opts = EstimateOptions::haar_daniell((t as f64).sqrt() as usize);
        group.bench_with_input(BenchmarkId::from_parameter(t), &x, |b, x| {
            b.iter(|| mv_ews(black_box(x), &opts).unwrap())
        });
    }
    group.finish();
}

fn variance(c: &mut Criterion) {
    let mut group = c.benchmark_group("var_ews");
    group.sample_size(10);
    for t in [256, 1024] {
        let (_, x) = fixture_and_draw(t, 1);
        let m = (t as f64).sqrt() as usize;
        let s = mv_ews(&x, &EstimateOptions::haar_daniell(m)).unwrap();
        let sys = DiscreteWaveletSystem::new(make_filter(Family::DaubExPhase, 1).unwrap(), s.levels()).unwrap();
        let acp = AutoCorrProducts::with_max_lag(&sys, 2 * m).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(t), &s, |b, s| {
            b.iter(|| var_ews(black_box(s), &acp, None).unwrap())
        });
    }
    group.finish();
}

fn simulate(c: &mut Criterion) {
    let mut group = c.benchmark_group("rmvlsw");
    for t in [256, 1024] {
        let (s, _) = fixture_and_draw(t, 1);
        let gen = InnovationGenerator::gaussian(5);
        group.bench_with_input(BenchmarkId::from_parameter(t), &s, |b, s| {
            b.iter(|| rmvlsw(black_box(s), &gen).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, inner_products, estimate, variance, simulate);
criterion_main!(benches);
