//! Exact single-shot execution on the tableau, and the noiseless reference
//! sample that anchors the Pauli-frame simulator.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, LocationKind, Op, Qubit, ResolveMode, Signal};
use crate::decoders::{decode_outcomes, Outcome};
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliOperator};
use crate::tableau::Tableau;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotRecord {
    pub measurement_bits: Vec<bool>,
    pub classical_registers: Vec<Outcome>,
    /// Per segment: whether any of its checks failed.
    pub verification_failed: Vec<bool>,
    /// Per logical output: whether it read nonzero or erased.
    pub output_failed: Vec<bool>,
}

struct Classical {
    bits: Vec<bool>,
    regs: Vec<Outcome>,
}

impl Classical {
    fn value(&self, s: &Signal) -> Outcome {
        match *s {
            Signal::Bit(b) => Outcome::bit(self.bits[b as usize]),
            Signal::Reg(r) => self.regs[r as usize],
        }
    }

    fn parity(&self, list: &[Signal]) -> bool {
        list.iter().fold(false, |acc, s| acc ^ (self.value(s) == Outcome::One))
    }
}

fn apply_fault(t: &mut Tableau, targets: [u32; 2], p: &PauliOperator) {
    for q in 0..p.n_qubits() {
        let letter = p.letter(q);
        if letter != Letter::I {
            t.pauli(targets[q] as usize, letter);
        }
    }
}

fn op_qubits(circuit: &Circuit, op: &Op, mut f: impl FnMut(Qubit)) {
    match op {
        Op::Loc(i) => {
            let loc = &circuit.locations[*i as usize];
            loc.targets[..loc.kind.arity()].iter().for_each(|&q| f(q));
        }
        Op::CondPauli { qubits, .. } => qubits.iter().for_each(|&q| f(q)),
        Op::CondSwap { a, b, .. } => a.iter().chain(b.iter()).for_each(|&q| f(q)),
        _ => {}
    }
}

/// Tableau slots of circuit qubits. A qubit gets a slot at its first use and
/// returns it, reset to |0>, after its last use, so the tableau only holds
/// the qubits alive at the same time.
struct Slots {
    slot: Vec<u32>,
    /// `(op index, qubit)` sorted by op index.
    releases: Vec<(usize, Qubit)>,
    next_release: usize,
    free: Vec<u32>,
    size: usize,
}

const NO_SLOT: u32 = u32::MAX;

impl Slots {
    fn new(circuit: &Circuit) -> Slots {
        let n = circuit.n_qubits as usize;
        let mut first = vec![usize::MAX; n];
        let mut last = vec![0usize; n];
        for (i, op) in circuit.ops.iter().enumerate() {
            op_qubits(circuit, op, |q| {
                let q = q as usize;
                first[q] = first[q].min(i);
                last[q] = i;
            });
        }
        for (_, qubits) in &circuit.blocks {
            for &q in qubits {
                last[q as usize] = usize::MAX;
            }
        }
        let mut events: Vec<(usize, i32)> = Vec::new();
        let mut releases = Vec::new();
        for q in 0..n {
            if first[q] == usize::MAX {
                continue;
            }
            events.push((first[q], 1));
            if last[q] != usize::MAX {
                events.push((last[q] + 1, -1));
                releases.push((last[q], q as Qubit));
            }
        }
        events.sort_unstable_by_key(|&(i, d)| (i, d));
        let (mut live, mut size) = (0i32, 0i32);
        for (_, d) in events {
            live += d;
            size = size.max(live);
        }
        releases.sort_unstable();
        Slots { slot: vec![NO_SLOT; n], releases, next_release: 0, free: (0..size as u32).rev().collect(), size: size as usize }
    }

    fn acquire(&mut self, circuit: &Circuit, op: &Op) {
        op_qubits(circuit, op, |q| {
            if self.slot[q as usize] == NO_SLOT {
                self.slot[q as usize] = self.free.pop().expect("slot count covers live qubits");
            }
        });
    }

    fn get(&self, q: Qubit) -> usize {
        self.slot[q as usize] as usize
    }

    fn release(&mut self, op_index: usize, t: &mut Tableau) {
        while let Some(&(i, q)) = self.releases.get(self.next_release) {
            if i != op_index {
                break;
            }
            let s = self.slot[q as usize];
            t.reset(s as usize, false);
            self.free.push(s);
            self.slot[q as usize] = NO_SLOT;
            self.next_release += 1;
        }
    }
}

/// Executes a circuit once on the tableau. `choose` decides random outcomes
/// and random substitutions; `faults` maps fault-site ids to Paulis.
fn execute(
    circuit: &Circuit,
    faults: &HashMap<u32, PauliOperator>,
    mut choose: impl FnMut() -> bool,
    mut on_control: impl FnMut(usize, bool),
) -> Result<ShotRecord> {
    let mut slots = Slots::new(circuit);
    let mut t = Tableau::new(slots.size);
    let mut cl = Classical { bits: vec![false; circuit.n_bits as usize], regs: vec![Outcome::Zero; circuit.n_regs as usize] };
    let mut produced = vec![false; circuit.n_bits as usize];
    let mut seg_failed = vec![false; circuit.segments.len()];
    let check_read = |list: &[Signal], produced: &[bool]| -> Result<()> {
        for s in list {
            if let Signal::Bit(b) = s {
                if !produced[*b as usize] {
                    return Err(Error::Contract(format!("bit b{b} read before it is produced")));
                }
            }
        }
        Ok(())
    };
    for (op_index, op) in circuit.ops.iter().enumerate() {
        slots.acquire(circuit, op);
        match op {
            Op::Loc(i) => {
                let loc = &circuit.locations[*i as usize];
                let q = slots.get(loc.targets[0]);
                let targets = [q as u32, if loc.kind.arity() == 2 { slots.get(loc.targets[1]) as u32 } else { 0 }];
                let fault = faults.get(i);
                match loc.kind {
                    LocationKind::Prep0 | LocationKind::PrepPlus => {
                        t.reset(q, loc.kind == LocationKind::PrepPlus);
                        if let Some(f) = fault {
                            apply_fault(&mut t, targets, f);
                        }
                    }
                    LocationKind::Gate1(g) => {
                        t.gate1(q, g);
                        if let Some(f) = fault {
                            apply_fault(&mut t, targets, f);
                        }
                    }
                    LocationKind::Cnot => {
                        t.cnot(q, targets[1] as usize);
                        if let Some(f) = fault {
                            apply_fault(&mut t, targets, f);
                        }
                    }
                    LocationKind::MeasureZ | LocationKind::MeasureX => {
                        if let Some(f) = fault {
                            apply_fault(&mut t, targets, f);
                        }
                        let (bit, _) = if loc.kind == LocationKind::MeasureZ {
                            t.measure_z_with(q, &mut choose)
                        } else {
                            t.measure_x_with(q, &mut choose)
                        };
                        cl.bits[loc.bit as usize] = bit;
                        produced[loc.bit as usize] = true;
                    }
                }
            }
            Op::CondPauli { letter, qubits, control } => {
                check_read(control, &produced)?;
                let fire = cl.parity(control);
                on_control(op_index, fire);
                if fire {
                    for &q in qubits.iter() {
                        t.pauli(slots.get(q), *letter);
                    }
                }
            }
            Op::CondSwap { a, b, control } => {
                check_read(std::slice::from_ref(control), &produced)?;
                let fire = cl.value(control) == Outcome::One;
                on_control(op_index, fire);
                if fire {
                    for (&x, &y) in a.iter().zip(b.iter()) {
                        t.swap(slots.get(x), slots.get(y));
                    }
                }
            }
            Op::Decode { kind, inputs, outputs } => {
                check_read(inputs, &produced)?;
                let m: Vec<Outcome> = inputs.iter().map(|s| cl.value(s)).collect();
                for (&r, o) in outputs.iter().zip(decode_outcomes(*kind, &m)) {
                    cl.regs[r as usize] = o;
                }
            }
            Op::Resolve { reg, mode } => {
                let r = *reg as usize;
                if cl.regs[r].is_erased() {
                    match mode {
                        ResolveMode::Randomize => cl.regs[r] = Outcome::bit(choose()),
                        ResolveMode::Flag(f) => {
                            cl.regs[r] = Outcome::Zero;
                            cl.regs[*f as usize] = Outcome::One;
                        }
                    }
                }
            }
            Op::ClearReg(r) => cl.regs[*r as usize] = Outcome::Zero,
            Op::Check { segment, parity } => {
                check_read(parity, &produced)?;
                if cl.parity(parity) {
                    seg_failed[*segment as usize] = true;
                }
            }
            Op::SegmentBegin(_) | Op::SegmentEnd(_) => {}
        }
        slots.release(op_index, &mut t);
    }
    let output_failed = circuit
        .outputs
        .iter()
        .map(|list| list.iter().any(|s| cl.value(s) != Outcome::Zero))
        .collect();
    Ok(ShotRecord {
        measurement_bits: cl.bits,
        classical_registers: cl.regs,
        verification_failed: seg_failed,
        output_failed,
    })
}

/// One exact sample of the faulty circuit. Verification records are reported
/// but do not trigger reruns.
pub fn run_shot(circuit: &Circuit, faults: &HashMap<u32, PauliOperator>, seed: u64) -> Result<ShotRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    execute(circuit, faults, || rng.gen(), |_, _| {})
}

/// Noiseless sample with every random choice set to 0, plus the value of each
/// classical control at the time it is evaluated.
#[derive(Clone, Debug)]
pub struct Reference {
    pub bits: Vec<bool>,
    /// Indexed by op position; only meaningful for conditional ops.
    pub controls: Vec<bool>,
}

impl Reference {
    pub fn compute(circuit: &Circuit) -> Result<Reference> {
        let mut controls = vec![false; circuit.ops.len()];
        let rec = execute(circuit, &HashMap::new(), || false, |i, v| controls[i] = v)?;
        if let Some(s) = rec.verification_failed.iter().position(|&f| f) {
            return Err(Error::Contract(format!("noiseless execution fails verification of segment {s}")));
        }
        for (i, op) in circuit.ops.iter().enumerate() {
            if matches!(op, Op::CondSwap { .. }) && controls[i] {
                return Err(Error::Contract("conditional swap fires noiselessly".into()));
            }
        }
        Ok(Reference { bits: rec.measurement_bits, controls })
    }
}
