//! Low-level circuit emission: qubit recycling, classical registers, verified
//! segments and idle insertion.

use std::collections::{BTreeSet, HashMap};

use crate::circuit::{Basis, Circuit, Gate1, Location, LocationKind, Op, Qubit, ResolveMode, Segment, Signal};
use crate::decoders::DecoderKind;
use crate::pauli::Letter;

struct Open {
    id: u32,
    qubits: BTreeSet<Qubit>,
}

#[derive(Default)]
pub(crate) struct Builder {
    pub c: Circuit,
    free: Vec<Qubit>,
    pub noisy: bool,
    open: Vec<Open>,
    classes: HashMap<String, u32>,
}

#[derive(Clone, Copy)]
enum Clock {
    Fresh,
    Live(u32),
    Dead,
}

impl Builder {
    pub fn new() -> Self {
        Builder { noisy: true, ..Default::default() }
    }

    fn touch(&mut self, qubits: &[Qubit]) {
        for seg in &mut self.open {
            seg.qubits.extend(qubits.iter().copied());
        }
    }

    fn alloc(&mut self) -> Qubit {
        self.free.pop().unwrap_or_else(|| {
            self.c.n_qubits += 1;
            self.c.n_qubits - 1
        })
    }

    fn push_loc(&mut self, kind: LocationKind, targets: [Qubit; 2], bit: u32) -> u32 {
        let index = self.c.locations.len() as u32;
        self.c.locations.push(Location { kind, targets, noisy: self.noisy, bit });
        self.c.ops.push(Op::Loc(index));
        self.touch(&targets[..kind.arity()]);
        index
    }

    /// A fresh qubit in `|0>` (basis Z) or `|+>` (basis X).
    pub fn prep(&mut self, basis: Basis) -> Qubit {
        let q = self.alloc();
        let kind = if basis == Basis::Z { LocationKind::Prep0 } else { LocationKind::PrepPlus };
        self.push_loc(kind, [q, 0], 0);
        q
    }

    pub fn cnot(&mut self, control: Qubit, target: Qubit) {
        self.push_loc(LocationKind::Cnot, [control, target], 0);
    }

    pub fn gate1(&mut self, q: Qubit, g: Gate1) -> u32 {
        self.push_loc(LocationKind::Gate1(g), [q, 0], 0)
    }

    /// Measures and releases a qubit.
    pub fn measure(&mut self, q: Qubit, basis: Basis) -> Signal {
        let bit = self.c.n_bits;
        self.c.n_bits += 1;
        let kind = if basis == Basis::Z { LocationKind::MeasureZ } else { LocationKind::MeasureX };
        self.push_loc(kind, [q, 0], bit);
        self.free.push(q);
        Signal::Bit(bit)
    }

    pub fn reg(&mut self) -> u32 {
        self.c.n_regs += 1;
        self.c.n_regs - 1
    }

    pub fn decode(&mut self, kind: DecoderKind, inputs: Vec<Signal>) -> Vec<Signal> {
        let outputs: Vec<u32> = (0..kind.n_outputs()).map(|_| self.reg()).collect();
        self.c.ops.push(Op::Decode { kind, inputs: inputs.into(), outputs: outputs.clone().into() });
        outputs.into_iter().map(Signal::Reg).collect()
    }

    pub fn cond_pauli(&mut self, letter: Letter, qubits: Vec<Qubit>, control: Vec<Signal>) {
        if control.is_empty() || qubits.is_empty() {
            return;
        }
        self.touch(&qubits);
        self.c.ops.push(Op::CondPauli { letter, qubits: qubits.into(), control: control.into() });
    }

    pub fn cond_swap(&mut self, a: Vec<Qubit>, b: Vec<Qubit>, control: Signal) {
        self.touch(&a);
        self.touch(&b);
        self.c.ops.push(Op::CondSwap { a: a.into(), b: b.into(), control });
    }

    pub fn resolve(&mut self, reg: u32, mode: ResolveMode) {
        self.c.ops.push(Op::Resolve { reg, mode });
    }

    /// A register cleared to 0, used as an erasure flag.
    pub fn flag(&mut self) -> u32 {
        let r = self.reg();
        self.c.ops.push(Op::ClearReg(r));
        r
    }

    pub fn begin_segment(&mut self, class: &str) {
        let class = match self.classes.get(class) {
            Some(&c) => c,
            None => {
                let c = self.c.classes.len() as u32;
                self.c.classes.push(class.to_string());
                self.classes.insert(class.to_string(), c);
                c
            }
        };
        let id = self.c.segments.len() as u32;
        self.c.segments.push(Segment {
            class,
            begin: self.c.ops.len(),
            end: 0,
            qubits: Vec::new(),
            bits: self.c.n_bits..self.c.n_bits,
            regs: self.c.n_regs..self.c.n_regs,
            parent: self.open.last().map(|o| o.id),
        });
        self.c.ops.push(Op::SegmentBegin(id));
        self.open.push(Open { id, qubits: BTreeSet::new() });
    }

    /// Adds a check to the innermost open segment.
    pub fn check(&mut self, parity: Vec<Signal>) {
        let segment = self.open.last().expect("check outside a segment").id;
        self.c.ops.push(Op::Check { segment, parity: parity.into() });
    }

    pub fn end_segment(&mut self) {
        let open = self.open.pop().expect("no open segment");
        let seg = &mut self.c.segments[open.id as usize];
        seg.end = self.c.ops.len();
        seg.qubits = open.qubits.into_iter().collect();
        seg.bits.end = self.c.n_bits;
        seg.regs.end = self.c.n_regs;
        self.c.ops.push(Op::SegmentEnd(open.id));
    }

    /// Inserts noisy identity locations on every qubit touched since op
    /// `start` for each unit time step in which it waits. Each location takes
    /// one step and runs as early as its qubits allow, except that
    /// preparations happen just before the first use of the qubit.
    /// Classical operations take no time.
    pub fn insert_idles(&mut self, start: usize) {
        let mut clock: HashMap<Qubit, Clock> = HashMap::new();
        let mut out: Vec<Op> = Vec::with_capacity(self.c.ops.len() - start);
        let mut idles: Vec<Qubit> = Vec::new();
        let mut depth = 0u32;
        let ops = std::mem::take(&mut self.c.ops);
        let (head, tail) = ops.split_at(start);
        for op in tail {
            match op {
                Op::Loc(i) => {
                    let loc = self.c.locations[*i as usize];
                    let targets = &loc.targets[..loc.kind.arity()];
                    if matches!(loc.kind, LocationKind::Prep0 | LocationKind::PrepPlus) {
                        clock.insert(loc.targets[0], Clock::Fresh);
                        out.push(op.clone());
                        continue;
                    }
                    let ready = |c: Option<&Clock>| match c {
                        None | Some(Clock::Dead) => 0,
                        Some(Clock::Fresh) => 1,
                        Some(Clock::Live(t)) => *t,
                    };
                    let t = targets.iter().map(|q| ready(clock.get(q))).max().unwrap() + 1;
                    for &q in targets {
                        let wait = match clock.get(&q) {
                            None => t - 1,
                            Some(Clock::Live(s)) => t - s - 1,
                            Some(Clock::Fresh) | Some(Clock::Dead) => 0,
                        };
                        for _ in 0..wait {
                            idles.push(q);
                            out.push(Op::Loc(u32::MAX));
                        }
                        clock.insert(q, if loc.kind.is_measurement() { Clock::Dead } else { Clock::Live(t) });
                    }
                    depth = depth.max(t);
                    out.push(op.clone());
                }
                Op::CondSwap { a, b, .. } => {
                    for (x, y) in a.iter().zip(b.iter()) {
                        if let (Some(Clock::Live(s)), Some(Clock::Live(u))) = (clock.get(x).copied(), clock.get(y).copied()) {
                            clock.insert(*x, Clock::Live(s.max(u)));
                            clock.insert(*y, Clock::Live(s.max(u)));
                        }
                    }
                    out.push(op.clone());
                }
                _ => out.push(op.clone()),
            }
        }
        let mut tail_qubits: Vec<(Qubit, u32)> = clock
            .iter()
            .filter_map(|(&q, c)| match c {
                Clock::Live(t) if *t < depth => Some((q, depth - t)),
                _ => None,
            })
            .collect();
        tail_qubits.sort_unstable();
        let mut ops: Vec<Op> = head.to_vec();
        let mut next = idles.into_iter();
        for op in out {
            if let Op::Loc(u32::MAX) = op {
                let q = next.next().unwrap();
                let index = self.c.locations.len() as u32;
                self.c.locations.push(Location { kind: LocationKind::Gate1(Gate1::I), targets: [q, 0], noisy: self.noisy, bit: 0 });
                ops.push(Op::Loc(index));
            } else {
                ops.push(op);
            }
        }
        for (q, n) in tail_qubits {
            for _ in 0..n {
                let index = self.c.locations.len() as u32;
                self.c.locations.push(Location { kind: LocationKind::Gate1(Gate1::I), targets: [q, 0], noisy: self.noisy, bit: 0 });
                ops.push(Op::Loc(index));
                self.touch(&[q]);
            }
        }
        self.c.ops = ops;
        for (i, op) in self.c.ops.iter().enumerate().skip(start) {
            match op {
                Op::SegmentBegin(s) => self.c.segments[*s as usize].begin = i,
                Op::SegmentEnd(s) => self.c.segments[*s as usize].end = i,
                _ => {}
            }
        }
    }

    /// Inserts noisy identity locations for the gaps between consecutive
    /// operations of each qubit since op `start`, with every location
    /// scheduled as late as possible. Waits before a qubit's first operation
    /// and after its last one are not counted, so ancillas are effectively
    /// prepared just in time.
    pub fn insert_gap_idles(&mut self, start: usize) {
        let ops = std::mem::take(&mut self.c.ops);
        let mut time: Vec<i64> = vec![0; ops.len()];
        let mut next: HashMap<Qubit, i64> = HashMap::new();
        for i in (start..ops.len()).rev() {
            match &ops[i] {
                Op::Loc(l) => {
                    let loc = self.c.locations[*l as usize];
                    let targets = &loc.targets[..loc.kind.arity()];
                    let t = targets.iter().map(|q| next.get(q).copied().unwrap_or(1)).min().unwrap() - 1;
                    time[i] = t;
                    for &q in targets {
                        if matches!(loc.kind, LocationKind::Prep0 | LocationKind::PrepPlus) {
                            next.remove(&q);
                        } else {
                            next.insert(q, t);
                        }
                    }
                }
                Op::CondSwap { a, b, .. } => {
                    for (x, y) in a.iter().zip(b.iter()) {
                        if let (Some(&s), Some(&u)) = (next.get(x), next.get(y)) {
                            next.insert(*x, s.min(u));
                            next.insert(*y, s.min(u));
                        }
                    }
                }
                _ => {}
            }
        }
        let mut last: HashMap<Qubit, i64> = HashMap::new();
        let mut out: Vec<Op> = ops[..start].to_vec();
        for (i, op) in ops.iter().enumerate().skip(start) {
            if let Op::Loc(l) = op {
                let loc = self.c.locations[*l as usize];
                for &q in &loc.targets[..loc.kind.arity()] {
                    if let Some(&prev) = last.get(&q) {
                        for _ in 0..(time[i] - prev - 1).max(0) {
                            let index = self.c.locations.len() as u32;
                            self.c.locations.push(Location {
                                kind: LocationKind::Gate1(Gate1::I),
                                targets: [q, 0],
                                noisy: self.noisy,
                                bit: 0,
                            });
                            out.push(Op::Loc(index));
                        }
                    }
                    if loc.kind.is_measurement() {
                        last.remove(&q);
                    } else {
                        last.insert(q, time[i]);
                    }
                }
            }
            out.push(op.clone());
        }
        self.c.ops = out;
        for (i, op) in self.c.ops.iter().enumerate().skip(start) {
            match op {
                Op::SegmentBegin(s) => self.c.segments[*s as usize].begin = i,
                Op::SegmentEnd(s) => self.c.segments[*s as usize].end = i,
                _ => {}
            }
        }
    }

    pub fn finish(self) -> Circuit {
        assert!(self.open.is_empty(), "unterminated segment");
        self.c
    }
}
