//! Shared fixtures for the benchmarks.

use ftlab::estimator::BenchmarkSpec;
use ftlab::{Circuit, CodeSpec, NoiseParams};

/// Compiled 10-round CNOT benchmark of `code` at `p = gamma`.
pub fn benchmark_circuit(code: &str, p: f64) -> (BenchmarkSpec, Circuit) {
    let spec = BenchmarkSpec::new(CodeSpec::parse(code).unwrap(), NoiseParams::new(p, p).unwrap());
    let circuit = spec.compile().unwrap();
    (spec, circuit)
}
