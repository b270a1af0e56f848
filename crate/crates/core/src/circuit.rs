//! Flat Clifford circuit representation shared by the simulators and the
//! gadget compiler.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::decoders::DecoderKind;
use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliOperator};

pub type Qubit = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate1 {
    I,
    X,
    Y,
    Z,
    H,
    S,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocationKind {
    Prep0,
    PrepPlus,
    Gate1(Gate1),
    Cnot,
    MeasureZ,
    MeasureX,
}

impl LocationKind {
    pub fn arity(self) -> usize {
        if self == LocationKind::Cnot {
            2
        } else {
            1
        }
    }

    pub fn is_unitary(self) -> bool {
        matches!(self, LocationKind::Gate1(_) | LocationKind::Cnot)
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, LocationKind::MeasureZ | LocationKind::MeasureX)
    }

    pub fn name(self) -> &'static str {
        match self {
            LocationKind::Prep0 => "prep_0",
            LocationKind::PrepPlus => "prep_plus",
            LocationKind::Gate1(Gate1::I) => "i",
            LocationKind::Gate1(Gate1::X) => "x",
            LocationKind::Gate1(Gate1::Y) => "y",
            LocationKind::Gate1(Gate1::Z) => "z",
            LocationKind::Gate1(Gate1::H) => "h",
            LocationKind::Gate1(Gate1::S) => "s",
            LocationKind::Cnot => "cnot",
            LocationKind::MeasureZ => "measure_z",
            LocationKind::MeasureX => "measure_x",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn dual(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }
}

/// One fault site. For CNOT `targets = [control, target]`; single-qubit kinds
/// use `targets[0]` only. Measurements write `bit`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Location {
    pub kind: LocationKind,
    pub targets: [Qubit; 2],
    pub noisy: bool,
    pub bit: u32,
}

/// Classical value read by feedback: a measurement record entry or a decoder
/// register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Signal {
    Bit(u32),
    Reg(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResolveMode {
    /// Replace an erased register by a uniformly random bit.
    Randomize,
    /// Clear the erasure and OR the erasure flag into another register.
    Flag(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    Loc(u32),
    /// Noiseless Pauli frame correction applied when the parity of `control` is 1.
    CondPauli { letter: Letter, qubits: Box<[Qubit]>, control: Box<[Signal]> },
    /// Noiseless swap of two equally sized qubit lists, applied when `control` is 1.
    CondSwap { a: Box<[Qubit]>, b: Box<[Qubit]>, control: Signal },
    Decode { kind: DecoderKind, inputs: Box<[Signal]>, outputs: Box<[u32]> },
    Resolve { reg: u32, mode: ResolveMode },
    ClearReg(u32),
    /// Verification record: the segment fails when the parity is 1.
    Check { segment: u32, parity: Box<[Signal]> },
    SegmentBegin(u32),
    SegmentEnd(u32),
}

/// A verified preparation: a contiguous op range acting on freshly prepared
/// qubits whose checks must all pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub class: u32,
    pub begin: usize,
    pub end: usize,
    pub qubits: Vec<Qubit>,
    pub bits: std::ops::Range<u32>,
    pub regs: std::ops::Range<u32>,
    pub parent: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    pub n_qubits: u32,
    pub locations: Vec<Location>,
    pub ops: Vec<Op>,
    pub n_bits: u32,
    pub n_regs: u32,
    pub segments: Vec<Segment>,
    /// Gadget class names indexed by `Segment::class`.
    pub classes: Vec<String>,
    /// Per logical qubit: the shot fails for that qubit when any listed value is
    /// nonzero or erased.
    pub outputs: Vec<Vec<Signal>>,
    /// Named blocks of qubits alive at the end of the circuit.
    pub blocks: Vec<(String, Vec<Qubit>)>,
}

impl Circuit {
    pub fn n_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn noisy_locations(&self) -> usize {
        self.locations.iter().filter(|l| l.noisy).count()
    }

    /// Counts of the top-level (outermost) segments by class.
    pub fn class_instances(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.classes.len()];
        for s in &self.segments {
            counts[s.class as usize] += 1;
        }
        counts
    }

    /// Checks structural invariants: arities, distinct CNOT targets, qubit
    /// ranges, and that every classical read refers to an already written value.
    pub fn validate(&self) -> Result<()> {
        let mut bit_written = vec![false; self.n_bits as usize];
        let mut reg_written = vec![false; self.n_regs as usize];
        let read = |s: &Signal, bw: &[bool], rw: &[bool]| -> Result<()> {
            let ok = match *s {
                Signal::Bit(b) => bw.get(b as usize).copied().unwrap_or(false),
                Signal::Reg(r) => rw.get(r as usize).copied().unwrap_or(false),
            };
            if ok {
                Ok(())
            } else {
                Err(Error::Contract(format!("{s:?} read before it is produced")))
            }
        };
        let qcheck = |q: Qubit| -> Result<()> {
            if q < self.n_qubits {
                Ok(())
            } else {
                Err(Error::Contract(format!("qubit {q} out of range")))
            }
        };
        for op in &self.ops {
            match op {
                Op::Loc(i) => {
                    let loc = &self.locations[*i as usize];
                    qcheck(loc.targets[0])?;
                    if loc.kind == LocationKind::Cnot {
                        qcheck(loc.targets[1])?;
                        if loc.targets[0] == loc.targets[1] {
                            return Err(Error::Contract("CNOT targets must differ".into()));
                        }
                    }
                    if loc.kind.is_measurement() {
                        bit_written[loc.bit as usize] = true;
                    }
                }
                Op::CondPauli { qubits, control, .. } => {
                    for q in qubits.iter() {
                        qcheck(*q)?;
                    }
                    for s in control.iter() {
                        read(s, &bit_written, &reg_written)?;
                    }
                }
                Op::CondSwap { a, b, control } => {
                    if a.len() != b.len() {
                        return Err(Error::Contract("swap lists differ in length".into()));
                    }
                    read(control, &bit_written, &reg_written)?;
                }
                Op::Decode { inputs, outputs, .. } => {
                    for s in inputs.iter() {
                        read(s, &bit_written, &reg_written)?;
                    }
                    for r in outputs.iter() {
                        reg_written[*r as usize] = true;
                    }
                }
                Op::Resolve { reg, mode } => {
                    read(&Signal::Reg(*reg), &bit_written, &reg_written)?;
                    if let ResolveMode::Flag(f) = mode {
                        read(&Signal::Reg(*f), &bit_written, &reg_written)?;
                    }
                }
                Op::ClearReg(r) => reg_written[*r as usize] = true,
                Op::Check { parity, .. } => {
                    for s in parity.iter() {
                        read(s, &bit_written, &reg_written)?;
                    }
                }
                Op::SegmentBegin(_) | Op::SegmentEnd(_) => {}
            }
        }
        for out in &self.outputs {
            for s in out {
                read(s, &bit_written, &reg_written)?;
            }
        }
        Ok(())
    }

    /// Text dump, one operation per line:
    /// `<kind> <targets...> #<fault_site_id>[!] [-> b<bit>]`, where `!` marks a
    /// noiseless location, followed by classical lines (`if`-controlled Paulis
    /// and swaps, decoders, resolves, checks and segment markers).
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "qubits {} bits {} regs {}", self.n_qubits, self.n_bits, self.n_regs);
        for op in &self.ops {
            let _ = writeln!(s, "{}", OpDisplay { circuit: self, op });
        }
        for (k, out) in self.outputs.iter().enumerate() {
            let _ = writeln!(s, "output {k} {}", signals(out));
        }
        s
    }
}

fn signal(s: &Signal) -> String {
    match s {
        Signal::Bit(b) => format!("b{b}"),
        Signal::Reg(r) => format!("r{r}"),
    }
}

fn signals(list: &[Signal]) -> String {
    if list.is_empty() {
        "0".to_string()
    } else {
        list.iter().map(signal).collect::<Vec<_>>().join("^")
    }
}

fn qubits(list: &[Qubit]) -> String {
    list.iter().map(|q| format!("q{q}")).collect::<Vec<_>>().join(" ")
}

struct OpDisplay<'a> {
    circuit: &'a Circuit,
    op: &'a Op,
}

impl fmt::Display for OpDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.op {
            Op::Loc(i) => {
                let loc = &self.circuit.locations[*i as usize];
                write!(f, "{} q{}", loc.kind.name(), loc.targets[0])?;
                if loc.kind == LocationKind::Cnot {
                    write!(f, " q{}", loc.targets[1])?;
                }
                write!(f, " #{i}{}", if loc.noisy { "" } else { "!" })?;
                if loc.kind.is_measurement() {
                    write!(f, " -> b{}", loc.bit)?;
                }
                Ok(())
            }
            Op::CondPauli { letter, qubits: q, control } => {
                write!(f, "pauli {} {} if {}", letter.as_char(), qubits(q), signals(control))
            }
            Op::CondSwap { a, b, control } => {
                write!(f, "swap [{}] [{}] if {}", qubits(a), qubits(b), signal(control))
            }
            Op::Decode { kind, inputs, outputs } => {
                let ins = inputs.iter().map(signal).collect::<Vec<_>>().join(" ");
                let outs = outputs.iter().map(|r| format!("r{r}")).collect::<Vec<_>>().join(" ");
                write!(f, "decode {kind:?} {ins} -> {outs}")
            }
            Op::Resolve { reg, mode } => match mode {
                ResolveMode::Randomize => write!(f, "resolve r{reg} random"),
                ResolveMode::Flag(g) => write!(f, "resolve r{reg} flag r{g}"),
            },
            Op::ClearReg(r) => write!(f, "clear r{r}"),
            Op::Check { segment, parity } => write!(f, "check s{segment} {}", signals(parity)),
            Op::SegmentBegin(s) => {
                let seg = &self.circuit.segments[*s as usize];
                write!(f, "begin s{s} {}", self.circuit.classes[seg.class as usize])
            }
            Op::SegmentEnd(s) => write!(f, "end s{s}"),
        }
    }
}

/// Conjugates `pauli` in place by a unitary location acting on `targets`.
pub fn conjugate_in_place(kind: LocationKind, targets: &[Qubit], p: &mut PauliOperator) -> Result<()> {
    let q = targets[0] as usize;
    let (x, z) = (p.x_bit(q), p.z_bit(q));
    match kind {
        LocationKind::Gate1(g) => match g {
            Gate1::I => {}
            Gate1::X => p.toggle_sign(z),
            Gate1::Z => p.toggle_sign(x),
            Gate1::Y => p.toggle_sign(x ^ z),
            Gate1::H => {
                p.toggle_sign(x && z);
                p.set(q, Letter::from_bits(z, x));
            }
            Gate1::S => {
                p.toggle_sign(x && z);
                p.set(q, Letter::from_bits(x, z ^ x));
            }
        },
        LocationKind::Cnot => {
            let t = targets[1] as usize;
            let (xt, zt) = (p.x_bit(t), p.z_bit(t));
            p.toggle_sign(x && zt && !(xt ^ z));
            p.set(t, Letter::from_bits(xt ^ x, zt));
            p.set(q, Letter::from_bits(x, z ^ zt));
        }
        other => return Err(Error::Contract(format!("{} is not unitary", other.name()))),
    }
    Ok(())
}

/// Returns `g P g^dagger` for a 1-qubit (or, for CNOT, 2-qubit control-target)
/// Pauli operator.
pub fn conjugate_pauli(kind: LocationKind, pauli: &PauliOperator) -> Result<PauliOperator> {
    if !kind.is_unitary() {
        return Err(Error::Contract(format!("{} is not unitary", kind.name())));
    }
    if pauli.n_qubits() != kind.arity() {
        return Err(Error::Contract(format!(
            "{} acts on {} qubits, operator has {}",
            kind.name(),
            kind.arity(),
            pauli.n_qubits()
        )));
    }
    let mut out = pauli.clone();
    conjugate_in_place(kind, &[0, 1], &mut out)?;
    Ok(out)
}
