use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use ftlab::constants::FitConstants;
use ftlab::planner::{compose_error, optimize_chain, ConcatChain, SearchBounds, TargetSpec, UnderlyingKind};
use ftlab::GammaModel;

fn optimize(c: &mut Criterion) {
    let constants = FitConstants::bundled();
    let m = constants.model(GammaModel::Equal).unwrap();
    let bounds = SearchBounds::default();
    let mut group = c.benchmark_group("optimize");
    for kind in UnderlyingKind::ALL {
        let spec = TargetSpec::new(1e-24, 1e-3, GammaModel::Equal).unwrap();
        group.bench_function(kind.name(), |b| b.iter(|| black_box(optimize_chain(&spec, kind, m, &bounds).ok())));
    }
    group.finish();
}

fn compose(c: &mut Criterion) {
    let constants = FitConstants::bundled();
    let m = constants.model(GammaModel::Equal).unwrap();
    let chain = ConcatChain::table1();
    c.bench_function("compose_table1", |b| b.iter(|| black_box(compose_error(&chain, 1e-3, m).unwrap())));
}

criterion_group!(benches, optimize, compose);
criterion_main!(benches);
