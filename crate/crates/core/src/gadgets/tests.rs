use std::collections::HashMap;

use super::ft::{deviation, single_faults, Target, Verdict};
use super::*;
use crate::frame::{Engine, FrameOptions};
use crate::noise::NoiseParams;
use crate::sim::run_shot;

fn spec(s: &str) -> CodeSpec {
    CodeSpec::parse(s).unwrap()
}

fn frame_failures(g: &GadgetCircuit, batches: u64) -> u64 {
    let engine = Engine::new(&g.circuit).unwrap();
    let opts = FrameOptions::new(NoiseParams::noiseless());
    (0..batches)
        .map(|b| {
            let out = engine.run_batch(&opts, 7, b, u64::MAX, None);
            assert_eq!(out.aborted, 0);
            out.output_failed.iter().map(|m| m.count_ones() as u64).sum::<u64>()
        })
        .sum()
}

fn exact_outputs(g: &GadgetCircuit, seed: u64) -> Vec<bool> {
    let rec = run_shot(&g.circuit, &HashMap::new(), seed).unwrap();
    assert!(rec.verification_failed.iter().all(|&f| !f));
    rec.output_failed
}

#[test]
fn parse_names() {
    for s in ["c4", "c6:2", "c6:3", "steane:1", "steane:2", "c4steane:2", "q3", "q5"] {
        assert_eq!(spec(s).name(), s);
    }
    assert_eq!(spec("c6"), spec("c4c6:2"));
    assert!(CodeSpec::parse("q9").is_err());
    assert!(CodeSpec::parse("q4:2").is_err());
    assert!(CodeSpec::parse("d5").is_err());
}

#[test]
fn noiseless_benchmarks_never_fail() {
    let opts = CompileOptions::default();
    for (s, variant) in [
        ("c4", Variant::Full),
        ("c6:2", Variant::Full),
        ("steane:1", Variant::Full),
        ("steane:2", Variant::Simplified),
        ("c4steane:2", Variant::Simplified),
        ("q3", Variant::Full),
        ("q4", Variant::Full),
        ("q5", Variant::Full),
    ] {
        let g = build_cnot_benchmark(spec(s), variant, 2, opts).unwrap();
        assert_eq!(g.circuit.outputs.len(), spec(s).k(), "{s}");
        assert_eq!(frame_failures(&g, 4), 0, "{s}");
    }
}

#[test]
fn benchmarks_are_exact_on_the_tableau() {
    for s in ["c4", "steane:1", "q3", "c6:2"] {
        for opts in [
            CompileOptions::default(),
            CompileOptions { steane_prep: SteanePrep::Conventional, idle: IdlePolicy::None, bell_ed: false },
            CompileOptions { idle: IdlePolicy::Lockstep, ..CompileOptions::default() },
        ] {
            let g = build_cnot_benchmark(spec(s), Variant::Full, 1, opts).unwrap();
            for seed in 0..6 {
                assert!(exact_outputs(&g, seed).iter().all(|&f| !f), "{s} seed {seed}");
            }
        }
    }
}

#[test]
fn idle_policy_adds_identity_locations() {
    use crate::circuit::{Gate1, LocationKind};
    let code = spec("steane:1");
    let idles = |idle| {
        let g = build_cnot_benchmark(code, Variant::Full, 2, CompileOptions { idle, ..CompileOptions::default() })
            .unwrap();
        g.circuit.locations.iter().filter(|l| l.kind == LocationKind::Gate1(Gate1::I)).count()
    };
    assert_eq!(idles(IdlePolicy::None), 0);
    assert!(idles(IdlePolicy::Gaps) > 0);
    assert!(idles(IdlePolicy::Lockstep) > idles(IdlePolicy::Gaps));
}

fn prep_report(s: &str, state: Basis, opts: CompileOptions) -> ft::FaultReport {
    let g = build_prep(spec(s), state, opts).unwrap();
    let target = Target::logical(&g.blocks[0].1, state).unwrap();
    single_faults(&g, &target).unwrap()
}

#[test]
fn level1_preparations_tolerate_single_faults() {
    let goto = CompileOptions::default();
    let conventional = CompileOptions { steane_prep: SteanePrep::Conventional, ..goto };
    for state in [Basis::Z, Basis::X] {
        for (s, opts) in [("c4", goto), ("steane:1", goto), ("steane:1", conventional), ("q3", goto), ("q4", goto)]
        {
            let r = prep_report(s, state, opts);
            assert!(r.faults > 0);
            assert!(r.bad.is_empty(), "{s} {state:?} {:?}", r.bad);
            assert!(r.flagged > 0, "{s} {state:?}");
        }
    }
}

#[test]
fn bell_pairs_tolerate_single_faults() {
    for s in ["c4", "steane:1"] {
        let g = build_bell_prep(spec(s), CompileOptions::default()).unwrap();
        let target = Target::bell(&g.blocks[0].1, &g.blocks[1].1).unwrap();
        let r = single_faults(&g, &target).unwrap();
        assert!(r.bad.is_empty(), "{s} {:?}", r.bad);
    }
}

#[test]
fn c4_bell_detection_triggers_the_swap() {
    let g = build_bell_prep(spec("c4"), CompileOptions::default()).unwrap();
    assert!(g.circuit.ops.iter().any(|op| matches!(op, crate::circuit::Op::CondSwap { .. })));
    let target = Target::bell(&g.blocks[0].1, &g.blocks[1].1).unwrap();
    // An X fault on the first Bell CNOT target before detection.
    let loc = g
        .circuit
        .locations
        .iter()
        .position(|l| l.kind == crate::circuit::LocationKind::Cnot)
        .unwrap() as u32;
    let d = deviation(&g, &target, &[(loc, 0b0100)]).unwrap();
    assert!(target.acceptable(&d));
}

#[test]
fn steane_ec_corrects_one_error_and_not_two() {
    let g = build_knill_ec(spec("steane:1"), Basis::Z, CompileOptions::default()).unwrap();
    let target = Target::logical(&g.blocks[0].1, Basis::Z).unwrap();
    for &site in &g.input_sites {
        let d = deviation(&g, &target, &[(site, 0b01)]).unwrap();
        assert_eq!(target.classify(&d), Verdict::Trivial);
    }
    let d = deviation(&g, &target, &[(g.input_sites[0], 0b01), (g.input_sites[1], 0b01)]).unwrap();
    assert_eq!(target.classify(&d), Verdict::Harmful);
    let r = single_faults(&g, &target).unwrap();
    assert!(r.bad.is_empty(), "{:?}", r.bad);
}

#[test]
fn c4_ec_detects_single_faults() {
    for state in [Basis::Z, Basis::X] {
        let g = build_knill_ec(spec("c4"), state, CompileOptions::default()).unwrap();
        let target = Target::logical(&g.blocks[0].1, state).unwrap();
        let r = single_faults(&g, &target).unwrap();
        assert!(r.bad.is_empty(), "{state:?} {:?}", r.bad);
        assert!(r.flagged > 0);
    }
}

#[test]
fn star_u_permutes_logical_values() {
    for s in ["c4", "c6:2"] {
        for squared in [false, true] {
            let m = if squared { STAR_U2 } else { STAR_U };
            for input in [[false, false], [true, false], [false, true], [true, true]] {
                let g = build_star_u(spec(s), squared, input).unwrap();
                let want = crate::gf2::mat2_apply(m, input);
                assert_eq!(exact_outputs(&g, 1), want.to_vec(), "{s} {squared} {input:?}");
            }
        }
    }
}

#[test]
fn transversal_examples() {
    for s in ["steane:1", "c4", "q4", "c6:2"] {
        let code = spec(s);
        let g = build_transversal(code, Transversal::Cnot).unwrap();
        assert!(exact_outputs(&g, 3).iter().all(|&f| !f));
        for k in 0..code.k() {
            for letter in [Letter::X, Letter::Z] {
                let g = build_transversal(code, Transversal::Pauli(letter, k)).unwrap();
                let out = exact_outputs(&g, 5);
                let want: Vec<bool> = (0..code.k()).map(|i| i == k).collect();
                assert_eq!(out, want, "{s} {letter:?} {k}");
            }
        }
        for op in [Transversal::MeasureZ, Transversal::MeasureX] {
            let g = build_transversal(code, op).unwrap();
            assert!(exact_outputs(&g, 2).iter().all(|&f| !f));
        }
    }
}

#[test]
fn c6_correction_table_inverts_the_readout() {
    for ((n, j), ctrl) in c6_corrections() {
        assert!(n < 3 && j < 2 && !ctrl.is_empty());
    }
    assert!(c6_corrections().len() >= 4);
}
