use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use ftlab::frame::{Engine, FrameOptions};
use ftlab_bench::benchmark_circuit;

fn batches(c: &mut Criterion) {
    let mut group = c.benchmark_group("frame_batch");
    group.throughput(Throughput::Elements(64));
    for code in ["c4", "steane:1", "q3", "c6:2"] {
        let (spec, circuit) = benchmark_circuit(code, 1e-3);
        let engine = Engine::new(&circuit).unwrap();
        let opts = FrameOptions::new(spec.noise);
        let mut batch = 0;
        group.bench_function(code, |b| {
            b.iter(|| {
                batch += 1;
                black_box(engine.run_batch(&opts, 1, batch, u64::MAX, None))
            })
        });
    }
    group.finish();
}

fn compile(c: &mut Criterion) {
    c.bench_function("compile_q5", |b| b.iter(|| black_box(benchmark_circuit("q5", 1e-4))));
}

criterion_group!(benches, batches, compile);
criterion_main!(benches);
