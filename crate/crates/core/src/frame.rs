//! Bit-sliced Pauli-frame simulator. Each `u64` word carries 64 independent
//! shots. Measurement records are stored as flips relative to the noiseless
//! reference sample; decoder registers hold actual values.
//!
//! Verified segments are rejection sampled: lanes whose checks fail re-execute
//! the segment until it passes, which samples the post-selected state exactly.

use std::collections::HashMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Gate1, LocationKind, Op, ResolveMode, Signal};
use crate::decoders::decode_planes;
use crate::decoders::sliced::Planes;
use crate::error::{Error, Result};
use crate::noise::{channel_size, fault_bits, NoiseParams};
use crate::pauli::Letter;
use crate::sim::Reference;

pub const LANES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyMode {
    /// Re-execute failing segments until they pass.
    Rerun,
    /// Execute every segment once; failures are only recorded.
    RecordOnly,
    /// Like `Rerun`, except that each lane picks one uniformly random instance
    /// of the given class and accepts its single attempt without verification.
    ForceFail(u32),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameOptions {
    pub noise: NoiseParams,
    /// Random stabilizer frames after preparations and measurements. Disabling
    /// them gives plain Pauli propagation, used by fault enumeration.
    pub randomize: bool,
    pub verify: VerifyMode,
    pub max_attempts: u32,
}

impl FrameOptions {
    pub fn new(noise: NoiseParams) -> Self {
        FrameOptions { noise, randomize: true, verify: VerifyMode::Rerun, max_attempts: 1000 }
    }
}

/// Explicit faults, keyed by location index: `(lane mask, fault bits)` in the
/// encoding of [`fault_bits`]. Applied at every visit of the location.
#[derive(Clone, Debug, Default)]
pub struct Injection {
    pub faults: HashMap<u32, Vec<(u64, u8)>>,
}

impl Injection {
    pub fn add(&mut self, location: u32, lanes: u64, bits: u8) {
        self.faults.entry(location).or_default().push((lanes, bits));
    }
}

/// Final state of one 64-lane batch.
#[derive(Clone, Debug)]
pub struct BatchOutcome {
    pub active: u64,
    pub output_failed: Vec<u64>,
    pub aborted: u64,
    /// Lanes where an erased register was resolved at random.
    pub erased: u64,
    /// Per class: segment attempts and failed attempts over active lanes,
    /// excluding forced instances.
    pub class_attempts: Vec<u64>,
    pub class_failures: Vec<u64>,
    /// Per segment: lanes whose first attempt (every attempt in `RecordOnly`)
    /// failed.
    pub segment_failed: Vec<u64>,
    pub x: Vec<u64>,
    pub z: Vec<u64>,
    pub flips: Vec<u64>,
    pub regs: Vec<Planes>,
}

/// A circuit prepared for frame simulation.
#[derive(Clone, Debug)]
pub struct Engine<'c> {
    circuit: &'c Circuit,
    reference: Reference,
    class_segments: Vec<Vec<u32>>,
}

impl<'c> Engine<'c> {
    pub fn new(circuit: &'c Circuit) -> Result<Self> {
        circuit.validate()?;
        check_segments(circuit)?;
        let reference = Reference::compute(circuit)?;
        let mut class_segments = vec![Vec::new(); circuit.classes.len()];
        for (i, s) in circuit.segments.iter().enumerate() {
            class_segments[s.class as usize].push(i as u32);
        }
        Ok(Engine { circuit, reference, class_segments })
    }

    pub fn circuit(&self) -> &Circuit {
        self.circuit
    }

    pub fn reference(&self) -> &Reference {
        &self.reference
    }

    /// Runs one batch. Lanes outside `active` are simulated but ignored by
    /// the counters.
    pub fn run_batch(
        &self,
        opts: &FrameOptions,
        seed: u64,
        batch: u64,
        active: u64,
        injection: Option<&Injection>,
    ) -> BatchOutcome {
        let c = self.circuit;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(batch);
        let n_seg = c.segments.len();
        let mut forced = vec![0u64; n_seg];
        if let VerifyMode::ForceFail(class) = opts.verify {
            let list = &self.class_segments[class as usize];
            if !list.is_empty() {
                for lane in 0..LANES {
                    let s = list[rng.gen_range(0..list.len())];
                    forced[s as usize] |= 1 << lane;
                }
            }
        }
        let p_max = opts.noise.p.max(opts.noise.gamma);
        let mut st = State {
            engine: self,
            opts,
            injection,
            rng,
            p_max,
            log_q: (-p_max).ln_1p(),
            countdown: 0,
            active,
            x: vec![0; c.n_qubits as usize],
            z: vec![0; c.n_qubits as usize],
            flips: vec![0; c.n_bits as usize],
            regs: vec![Planes::default(); c.n_regs as usize],
            seg_fail: vec![0; n_seg],
            segment_failed: vec![0; n_seg],
            forced,
            aborted: 0,
            erased: 0,
            class_attempts: vec![0; c.classes.len()],
            class_failures: vec![0; c.classes.len()],
        };
        st.countdown = st.next_gap();
        st.exec_range(0, c.ops.len());
        let output_failed = c.outputs.iter().map(|list| list.iter().fold(0, |acc, s| acc | st.nonzero(s))).collect();
        BatchOutcome {
            active,
            output_failed,
            aborted: st.aborted & active,
            erased: st.erased & active,
            class_attempts: st.class_attempts,
            class_failures: st.class_failures,
            segment_failed: st.segment_failed,
            x: st.x,
            z: st.z,
            flips: st.flips,
            regs: st.regs,
        }
    }
}

/// Every segment must own its qubits, bits and registers, and prepare each of
/// its qubits before using it, so that re-execution starts from a clean slate.
fn check_segments(c: &Circuit) -> Result<()> {
    for (si, s) in c.segments.iter().enumerate() {
        if !matches!(c.ops.get(s.begin), Some(Op::SegmentBegin(x)) if *x as usize == si)
            || !matches!(c.ops.get(s.end), Some(Op::SegmentEnd(x)) if *x as usize == si)
        {
            return Err(Error::Contract(format!("segment {si} markers misplaced")));
        }
        let owned: std::collections::HashSet<u32> = s.qubits.iter().copied().collect();
        let mut prepared = std::collections::HashSet::new();
        let bad = |what: &str| Err(Error::Contract(format!("segment {si}: {what}")));
        for op in &c.ops[s.begin + 1..s.end] {
            match op {
                Op::Loc(i) => {
                    let loc = &c.locations[*i as usize];
                    let targets = &loc.targets[..loc.kind.arity()];
                    for q in targets {
                        if !owned.contains(q) {
                            return bad(&format!("touches foreign qubit {q}"));
                        }
                    }
                    if matches!(loc.kind, LocationKind::Prep0 | LocationKind::PrepPlus) {
                        prepared.insert(loc.targets[0]);
                    } else if targets.iter().any(|q| !prepared.contains(q)) {
                        return bad("uses a qubit before preparing it");
                    }
                    if loc.kind.is_measurement() && !s.bits.contains(&loc.bit) {
                        return bad("writes a foreign bit");
                    }
                }
                Op::CondPauli { qubits, .. } => {
                    if qubits.iter().any(|q| !owned.contains(q)) {
                        return bad("corrects a foreign qubit");
                    }
                }
                Op::CondSwap { a, b, .. } => {
                    if a.iter().chain(b.iter()).any(|q| !owned.contains(q)) {
                        return bad("swaps a foreign qubit");
                    }
                }
                Op::Decode { outputs, .. } => {
                    if outputs.iter().any(|r| !s.regs.contains(r)) {
                        return bad("decodes into a foreign register");
                    }
                }
                Op::Resolve { reg, mode } => {
                    let flag = match mode {
                        ResolveMode::Flag(f) => Some(*f),
                        ResolveMode::Randomize => None,
                    };
                    if !s.regs.contains(reg) || flag.is_some_and(|f| !s.regs.contains(&f)) {
                        return bad("resolves a foreign register");
                    }
                }
                Op::ClearReg(r) => {
                    if !s.regs.contains(r) {
                        return bad("clears a foreign register");
                    }
                }
                Op::Check { .. } | Op::SegmentBegin(_) | Op::SegmentEnd(_) => {}
            }
        }
    }
    Ok(())
}

struct State<'e, 'c> {
    engine: &'e Engine<'c>,
    opts: &'e FrameOptions,
    injection: Option<&'e Injection>,
    rng: ChaCha8Rng,
    p_max: f64,
    log_q: f64,
    /// Lane slots remaining before the next candidate fault.
    countdown: u64,
    active: u64,
    x: Vec<u64>,
    z: Vec<u64>,
    flips: Vec<u64>,
    regs: Vec<Planes>,
    seg_fail: Vec<u64>,
    segment_failed: Vec<u64>,
    forced: Vec<u64>,
    aborted: u64,
    erased: u64,
    class_attempts: Vec<u64>,
    class_failures: Vec<u64>,
}

fn mask(b: bool) -> u64 {
    if b {
        !0
    } else {
        0
    }
}

struct Saved {
    x: Vec<u64>,
    z: Vec<u64>,
    flips: Vec<u64>,
    regs: Vec<Planes>,
}

impl State<'_, '_> {
    fn next_gap(&mut self) -> u64 {
        if self.p_max <= 0.0 {
            return u64::MAX;
        }
        if self.p_max >= 1.0 {
            return 0;
        }
        let u: f64 = 1.0 - self.rng.gen::<f64>();
        let g = (u.ln() / self.log_q).floor();
        if g >= 1e18 {
            u64::MAX / 2
        } else {
            g as u64
        }
    }

    fn bit_value(&self, b: u32) -> u64 {
        mask(self.engine.reference.bits[b as usize]) ^ self.flips[b as usize]
    }

    /// Lanes where the signal reads 1 (erasures read 0).
    fn value(&self, s: &Signal) -> u64 {
        match *s {
            Signal::Bit(b) => self.bit_value(b),
            Signal::Reg(r) => self.regs[r as usize].v,
        }
    }

    fn nonzero(&self, s: &Signal) -> u64 {
        match *s {
            Signal::Bit(b) => self.bit_value(b),
            Signal::Reg(r) => self.regs[r as usize].v | self.regs[r as usize].e,
        }
    }

    fn parity(&self, list: &[Signal]) -> u64 {
        list.iter().fold(0, |acc, s| acc ^ self.value(s))
    }

    fn apply_bits(&mut self, targets: [u32; 2], lanes: u64, bits: u8) {
        let (a, b) = (targets[0] as usize, targets[1] as usize);
        if bits & 1 != 0 {
            self.x[a] ^= lanes;
        }
        if bits & 2 != 0 {
            self.z[a] ^= lanes;
        }
        if bits & 4 != 0 {
            self.x[b] ^= lanes;
        }
        if bits & 8 != 0 {
            self.z[b] ^= lanes;
        }
    }

    /// Samples channel faults at noisy locations, then applies explicit
    /// injections (also at noiseless ones).
    fn inject(&mut self, index: u32, kind: LocationKind, targets: [u32; 2], noisy: bool) {
        let p_loc = self.opts.noise.total(kind);
        if noisy && p_loc > 0.0 {
            let size = channel_size(kind);
            while self.countdown < LANES as u64 {
                let lane = self.countdown;
                if p_loc >= self.p_max || self.rng.gen::<f64>() * self.p_max < p_loc {
                    let idx = self.rng.gen_range(1..=size);
                    self.apply_bits(targets, 1 << lane, fault_bits(kind, idx));
                }
                self.countdown = self.countdown.saturating_add(1).saturating_add(self.next_gap());
            }
            self.countdown -= LANES as u64;
        }
        if let Some(list) = self.injection.and_then(|inj| inj.faults.get(&index)) {
            for &(lanes, bits) in list {
                self.apply_bits(targets, lanes, bits);
            }
        }
    }

    fn random_word(&mut self) -> u64 {
        if self.opts.randomize {
            self.rng.next_u64()
        } else {
            0
        }
    }

    fn exec_location(&mut self, index: u32) {
        let loc = self.engine.circuit.locations[index as usize];
        let q = loc.targets[0] as usize;
        match loc.kind {
            LocationKind::Prep0 => {
                self.x[q] = 0;
                self.z[q] = self.random_word();
            }
            LocationKind::PrepPlus => {
                self.z[q] = 0;
                self.x[q] = self.random_word();
            }
            LocationKind::Gate1(g) => match g {
                Gate1::H => std::mem::swap(&mut self.x[q], &mut self.z[q]),
                Gate1::S => self.z[q] ^= self.x[q],
                Gate1::I | Gate1::X | Gate1::Y | Gate1::Z => {}
            },
            LocationKind::Cnot => {
                let t = loc.targets[1] as usize;
                self.x[t] ^= self.x[q];
                self.z[q] ^= self.z[t];
            }
            LocationKind::MeasureZ | LocationKind::MeasureX => {}
        }
        self.inject(index, loc.kind, loc.targets, loc.noisy);
        match loc.kind {
            LocationKind::MeasureZ => {
                self.flips[loc.bit as usize] = self.x[q];
                self.z[q] ^= self.random_word();
            }
            LocationKind::MeasureX => {
                self.flips[loc.bit as usize] = self.z[q];
                self.x[q] ^= self.random_word();
            }
            _ => {}
        }
    }

    fn exec_range(&mut self, lo: usize, hi: usize) {
        let circuit = self.engine.circuit;
        let mut i = lo;
        while i < hi {
            match &circuit.ops[i] {
                Op::Loc(index) => self.exec_location(*index),
                Op::CondPauli { letter, qubits, control } => {
                    let fire = self.parity(control) ^ mask(self.engine.reference.controls[i]);
                    if fire != 0 {
                        let (px, pz) = letter.bits();
                        for &q in qubits.iter() {
                            if px {
                                self.x[q as usize] ^= fire;
                            }
                            if pz {
                                self.z[q as usize] ^= fire;
                            }
                        }
                    }
                }
                Op::CondSwap { a, b, control } => {
                    let fire = self.value(control);
                    if fire != 0 {
                        for (&qa, &qb) in a.iter().zip(b.iter()) {
                            let (qa, qb) = (qa as usize, qb as usize);
                            let dx = (self.x[qa] ^ self.x[qb]) & fire;
                            let dz = (self.z[qa] ^ self.z[qb]) & fire;
                            self.x[qa] ^= dx;
                            self.x[qb] ^= dx;
                            self.z[qa] ^= dz;
                            self.z[qb] ^= dz;
                        }
                    }
                }
                Op::Decode { kind, inputs, outputs } => {
                    let planes: Vec<Planes> = inputs
                        .iter()
                        .map(|s| match *s {
                            Signal::Bit(b) => Planes { v: self.bit_value(b), e: 0 },
                            Signal::Reg(r) => self.regs[r as usize],
                        })
                        .collect();
                    let mut out = vec![Planes::default(); outputs.len()];
                    decode_planes(*kind, &planes, &mut out);
                    for (&r, o) in outputs.iter().zip(out) {
                        self.regs[r as usize] = o;
                    }
                }
                Op::Resolve { reg, mode } => {
                    let r = *reg as usize;
                    let e = self.regs[r].e;
                    if e != 0 {
                        match mode {
                            ResolveMode::Randomize => {
                                let bits = self.rng.next_u64();
                                self.erased |= e;
                                self.regs[r].v = (self.regs[r].v & !e) | (bits & e);
                            }
                            ResolveMode::Flag(f) => {
                                let f = *f as usize;
                                self.regs[r].v &= !e;
                                self.regs[f].v |= e;
                                self.regs[f].e &= !e;
                            }
                        }
                        self.regs[r].e = 0;
                    }
                }
                Op::ClearReg(r) => self.regs[*r as usize] = Planes::default(),
                Op::Check { segment, parity } => {
                    let fail = self.parity(parity);
                    self.seg_fail[*segment as usize] |= fail;
                }
                Op::SegmentBegin(s) => {
                    let s = *s as usize;
                    self.exec_segment(s);
                    i = circuit.segments[s].end;
                }
                Op::SegmentEnd(_) => {}
            }
            i += 1;
        }
    }

    fn save(&self, s: usize) -> Saved {
        let seg = &self.engine.circuit.segments[s];
        Saved {
            x: seg.qubits.iter().map(|&q| self.x[q as usize]).collect(),
            z: seg.qubits.iter().map(|&q| self.z[q as usize]).collect(),
            flips: self.flips[seg.bits.start as usize..seg.bits.end as usize].to_vec(),
            regs: self.regs[seg.regs.start as usize..seg.regs.end as usize].to_vec(),
        }
    }

    /// Puts the saved values back on the lanes in `keep`.
    fn merge(&mut self, s: usize, saved: &Saved, keep: u64) {
        let seg = &self.engine.circuit.segments[s];
        let blend = |dst: &mut u64, src: u64| *dst = (*dst & !keep) | (src & keep);
        for (k, &q) in seg.qubits.iter().enumerate() {
            blend(&mut self.x[q as usize], saved.x[k]);
            blend(&mut self.z[q as usize], saved.z[k]);
        }
        for (k, b) in (seg.bits.start..seg.bits.end).enumerate() {
            blend(&mut self.flips[b as usize], saved.flips[k]);
        }
        for (k, r) in (seg.regs.start..seg.regs.end).enumerate() {
            let dst = &mut self.regs[r as usize];
            blend(&mut dst.v, saved.regs[k].v);
            blend(&mut dst.e, saved.regs[k].e);
        }
    }

    fn attempt(&mut self, s: usize) -> u64 {
        let (begin, end) = {
            let seg = &self.engine.circuit.segments[s];
            (seg.begin, seg.end)
        };
        self.seg_fail[s] = 0;
        self.exec_range(begin + 1, end);
        self.seg_fail[s]
    }

    fn count(&mut self, s: usize, lanes: u64, fail: u64) {
        let class = self.engine.circuit.segments[s].class as usize;
        let lanes = lanes & self.active & !self.forced[s];
        self.class_attempts[class] += lanes.count_ones() as u64;
        self.class_failures[class] += (fail & lanes).count_ones() as u64;
    }

    fn exec_segment(&mut self, s: usize) {
        let fail = self.attempt(s);
        self.count(s, !0, fail);
        if self.opts.verify == VerifyMode::RecordOnly {
            self.segment_failed[s] |= fail;
            return;
        }
        self.segment_failed[s] = fail;
        let forced = self.forced[s];
        let mut pending = fail & !forced & !self.aborted;
        let mut attempts = 1;
        while pending != 0 {
            if attempts >= self.opts.max_attempts {
                self.aborted |= pending;
                break;
            }
            let saved = self.save(s);
            let fail = self.attempt(s);
            self.merge(s, &saved, !pending);
            self.count(s, pending, fail);
            pending &= fail;
            attempts += 1;
        }
    }
}

/// Applies a Pauli letter to a frame word pair on the given lanes.
pub fn toggle_letter(x: &mut u64, z: &mut u64, letter: Letter, lanes: u64) {
    let (px, pz) = letter.bits();
    if px {
        *x ^= lanes;
    }
    if pz {
        *z ^= lanes;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Location, Segment};

    struct Builder {
        c: Circuit,
    }

    impl Builder {
        fn new(n: u32) -> Self {
            Builder { c: Circuit { n_qubits: n, ..Circuit::default() } }
        }
        fn loc(&mut self, kind: LocationKind, targets: [u32; 2]) -> u32 {
            let bit = if kind.is_measurement() {
                self.c.n_bits += 1;
                self.c.n_bits - 1
            } else {
                0
            };
            self.c.ops.push(Op::Loc(self.c.locations.len() as u32));
            self.c.locations.push(Location { kind, targets, noisy: true, bit });
            bit
        }
    }

    #[test]
    fn frame_matches_tableau_on_single_faults() {
        // Bell pair, then a parity check through an ancilla.
        let mut b = Builder::new(3);
        b.loc(LocationKind::PrepPlus, [0, 0]);
        b.loc(LocationKind::Prep0, [1, 0]);
        b.loc(LocationKind::Cnot, [0, 1]);
        b.loc(LocationKind::Gate1(Gate1::H), [1, 0]);
        b.loc(LocationKind::Gate1(Gate1::H), [1, 0]);
        b.loc(LocationKind::Prep0, [2, 0]);
        b.loc(LocationKind::Cnot, [0, 2]);
        b.loc(LocationKind::Cnot, [1, 2]);
        b.loc(LocationKind::MeasureZ, [2, 0]);
        b.loc(LocationKind::Gate1(Gate1::S), [0, 0]);
        b.loc(LocationKind::Gate1(Gate1::S), [0, 0]);
        b.loc(LocationKind::MeasureX, [0, 0]);
        b.loc(LocationKind::MeasureX, [1, 0]);
        let c = b.c;
        let engine = Engine::new(&c).unwrap();
        let opts = FrameOptions { randomize: false, ..FrameOptions::new(NoiseParams::noiseless()) };
        for (li, loc) in c.locations.iter().enumerate() {
            for idx in 1..=channel_size(loc.kind) {
                let bits = fault_bits(loc.kind, idx);
                let mut inj = Injection::default();
                inj.add(li as u32, 1, bits);
                let out = engine.run_batch(&opts, 0, 0, 1, Some(&inj));
                let op = crate::noise::fault_operator(loc.kind, bits);
                let tab = crate::sim::run_shot(&c, &HashMap::from([(li as u32, op)]), 5).unwrap();
                let parity = |bits: &[bool]| bits[1] ^ bits[2];
                let frame_bits: Vec<bool> = (0..3).map(|k| engine.reference.bits[k] ^ (out.flips[k] & 1 == 1)).collect();
                assert_eq!(frame_bits[0], tab.measurement_bits[0], "{li} {bits}");
                assert_eq!(parity(&frame_bits), parity(&tab.measurement_bits), "{li} {bits}");
            }
        }
    }

    #[test]
    fn random_frames_reproduce_outcome_statistics() {
        let mut b = Builder::new(2);
        b.loc(LocationKind::PrepPlus, [0, 0]);
        b.loc(LocationKind::Prep0, [1, 0]);
        b.loc(LocationKind::Cnot, [0, 1]);
        b.loc(LocationKind::MeasureZ, [0, 0]);
        b.loc(LocationKind::MeasureZ, [1, 0]);
        let c = b.c;
        let engine = Engine::new(&c).unwrap();
        let opts = FrameOptions::new(NoiseParams::noiseless());
        let mut ones = 0u32;
        for batch in 0..16 {
            let out = engine.run_batch(&opts, 9, batch, !0, None);
            assert_eq!(out.flips[0], out.flips[1]);
            ones += out.flips[0].count_ones();
        }
        assert!((400..624).contains(&ones), "{ones}");
    }

    fn verified_pair(seg_noisy: bool) -> Circuit {
        // A segment prepares |00> on qubits 0,1 and checks Z0 Z1 via ancilla 2.
        let mut b = Builder::new(3);
        b.c.classes = vec!["pair".into()];
        b.c.ops.push(Op::SegmentBegin(0));
        b.loc(LocationKind::Prep0, [0, 0]);
        b.loc(LocationKind::Prep0, [1, 0]);
        b.loc(LocationKind::Prep0, [2, 0]);
        b.loc(LocationKind::Cnot, [0, 2]);
        b.loc(LocationKind::Cnot, [1, 2]);
        let bit = b.loc(LocationKind::MeasureZ, [2, 0]);
        b.c.ops.push(Op::Check { segment: 0, parity: vec![Signal::Bit(bit)].into() });
        b.c.ops.push(Op::SegmentEnd(0));
        let end = b.c.ops.len() - 1;
        b.c.segments.push(Segment { class: 0, begin: 0, end, qubits: vec![0, 1, 2], bits: 0..1, regs: 0..0, parent: None });
        for l in b.c.locations.iter_mut() {
            l.noisy = seg_noisy;
        }
        b.loc(LocationKind::MeasureZ, [0, 0]);
        b.loc(LocationKind::MeasureZ, [1, 0]);
        b.c.outputs = vec![vec![Signal::Bit(1), Signal::Bit(2)]];
        b.c
    }

    #[test]
    fn reruns_remove_detected_faults() {
        let c = verified_pair(true);
        let engine = Engine::new(&c).unwrap();
        let opts = FrameOptions { randomize: false, ..FrameOptions::new(NoiseParams::noiseless()) };
        let mut inj = Injection::default();
        // X on qubit 0 after its preparation is caught by the check.
        inj.add(0, 0b1010, 0b01);
        let out = engine.run_batch(&opts, 0, 0, !0, Some(&inj));
        // The fault is re-applied on every visit, so those lanes exhaust their attempts.
        assert_eq!(out.aborted, 0b1010);
        assert_eq!(out.segment_failed[0], 0b1010);
        let rec = FrameOptions { verify: VerifyMode::RecordOnly, ..opts };
        let out = engine.run_batch(&rec, 0, 0, !0, Some(&inj));
        assert_eq!(out.segment_failed[0], 0b1010);
        assert_eq!(out.output_failed[0], 0b1010);
    }

    #[test]
    fn rerun_postselects_on_passing_checks() {
        // Bit 0 of a prepared |0> flips with rate p at preparation. After
        // verification, measurement-fault-free reruns give the post-selected
        // output, whose residual error comes only from the last measurements.
        let c = verified_pair(true);
        let engine = Engine::new(&c).unwrap();
        let opts = FrameOptions::new(NoiseParams::new(0.05, 0.05).unwrap());
        let (mut attempts, mut fails, mut out_fail) = (0u64, 0u64, 0u64);
        for batch in 0..400 {
            let out = engine.run_batch(&opts, 1, batch, !0, None);
            attempts += out.class_attempts[0];
            fails += out.class_failures[0];
            out_fail += out.output_failed[0].count_ones() as u64;
            assert_eq!(out.aborted, 0);
        }
        let shots = 400.0 * 64.0;
        // Per attempt failure: odd number of X flips reaching the ancilla.
        let rate = fails as f64 / attempts as f64;
        assert!((0.15..0.3).contains(&rate), "{rate}");
        // The two output measurements are always noisy; undetected in-segment
        // errors (e.g. X on both data qubits, or correlated CNOT faults) add more.
        let fo = out_fail as f64 / shots;
        assert!((0.09..0.16).contains(&fo), "{fo}");
    }

    #[test]
    fn forced_instances_skip_verification() {
        let c = verified_pair(true);
        let engine = Engine::new(&c).unwrap();
        let opts = FrameOptions { verify: VerifyMode::ForceFail(0), ..FrameOptions::new(NoiseParams::new(0.05, 0.05).unwrap()) };
        for batch in 0..8 {
            let out = engine.run_batch(&opts, 4, batch, !0, None);
            assert_eq!(out.aborted, 0);
            // Forced instances are excluded from the class counters.
            assert_eq!(out.class_attempts[0], 0);
        }
    }

    #[test]
    fn batches_are_deterministic() {
        let c = verified_pair(true);
        let engine = Engine::new(&c).unwrap();
        let opts = FrameOptions::new(NoiseParams::new(0.02, 0.01).unwrap());
        let a = engine.run_batch(&opts, 77, 3, !0, None);
        let b = engine.run_batch(&opts, 77, 3, !0, None);
        assert_eq!(a.flips, b.flips);
        assert_eq!(a.x, b.x);
        let d = engine.run_batch(&opts, 77, 4, !0, None);
        assert_ne!(a.flips, d.flips);
    }

    #[test]
    fn foreign_qubits_in_segments_are_rejected() {
        let mut c = verified_pair(false);
        c.segments[0].qubits = vec![0, 1];
        assert!(Engine::new(&c).is_err());
    }

    #[test]
    fn fault_rate_per_location_matches_p() {
        let mut b = Builder::new(1);
        b.loc(LocationKind::Prep0, [0, 0]);
        b.loc(LocationKind::Gate1(Gate1::I), [0, 0]);
        b.loc(LocationKind::MeasureZ, [0, 0]);
        b.c.locations[0].noisy = false;
        b.c.locations[2].noisy = false;
        let c = b.c;
        let engine = Engine::new(&c).unwrap();
        // Idle X or Y flips the outcome: rate 2/3 gamma.
        let opts = FrameOptions::new(NoiseParams::new(0.03, 0.03).unwrap());
        let mut ones = 0u64;
        let batches = 4000;
        for batch in 0..batches {
            ones += engine.run_batch(&opts, 2, batch, !0, None).flips[0].count_ones() as u64;
        }
        let n = (batches * 64) as f64;
        let expect = 0.02 * n;
        assert!((ones as f64 - expect).abs() < 5.0 * (expect * 0.98).sqrt(), "{ones} vs {expect}");
    }
}
