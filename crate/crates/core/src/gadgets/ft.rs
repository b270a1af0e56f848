//! Exhaustive single-fault analysis of compiled gadgets by Pauli propagation.

use crate::circuit::{Basis, Qubit};
use crate::codes::{c4_code, hamming_code, CssCode};
use crate::error::{Error, Result};
use crate::frame::{Engine, FrameOptions, Injection, VerifyMode, LANES};
use crate::gf2::{BitVec, Echelon};
use crate::noise::{channel_size, fault_bits, NoiseParams};

use super::{Block, GadgetCircuit, NodeCode};

/// Residual Pauli on the target qubits at the end of a run, relative to the
/// noiseless reference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deviation {
    /// Some verification check fired or a decoder reported an erasure.
    pub flagged: bool,
    pub x: BitVec,
    pub z: BitVec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    /// A stabilizer of the target state.
    Trivial,
    /// Within distance `t` of a stabilizer on every part.
    Correctable,
    /// Anticommutes with a code check.
    Detectable,
    Harmful,
}

/// An expected encoded stabilizer state on a list of qubits, split into
/// parts that are corrected independently.
#[derive(Clone, Debug)]
pub struct Target {
    pub qubits: Vec<Qubit>,
    pub parts: Vec<std::ops::Range<usize>>,
    /// Generators of the X-type and Z-type stabilizers of the state.
    pub x_group: Vec<BitVec>,
    pub z_group: Vec<BitVec>,
    /// Code checks detecting X errors (Z-type) and Z errors (X-type).
    pub z_checks: Vec<BitVec>,
    pub x_checks: Vec<BitVec>,
    pub t: usize,
}

fn level1_code(block: &Block) -> Result<CssCode> {
    match block.code() {
        Some(NodeCode::C4) if block.level() == 1 => Ok(c4_code()),
        Some(NodeCode::Steane) if block.level() == 1 => hamming_code(3),
        Some(NodeCode::Hamming(r)) if block.level() == 1 => hamming_code(r),
        _ => Err(Error::Unsupported("fault analysis targets level-1 blocks".into())),
    }
}

fn local(n: usize, offset: usize, support: &[usize]) -> BitVec {
    BitVec::from_support(n, &support.iter().map(|&i| i + offset).collect::<Vec<_>>())
}

impl Target {
    /// `|0...0>` (`state` Z) or `|+...+>` of a level-1 block.
    pub fn logical(block: &Block, state: Basis) -> Result<Target> {
        Target::product(&[(block, Some(state))], false)
    }

    /// Logical Bell pairs `X_k(a) X_k(b)`, `Z_k(a) Z_k(b)` across two
    /// level-1 blocks.
    pub fn bell(a: &Block, b: &Block) -> Result<Target> {
        Target::product(&[(a, None), (b, None)], true)
    }

    fn product(blocks: &[(&Block, Option<Basis>)], bell: bool) -> Result<Target> {
        let n: usize = blocks.iter().map(|(b, _)| b.qubits().len()).sum();
        let mut t = Target {
            qubits: Vec::new(),
            parts: Vec::new(),
            x_group: Vec::new(),
            z_group: Vec::new(),
            z_checks: Vec::new(),
            x_checks: Vec::new(),
            t: usize::MAX,
        };
        let mut pair_x: Vec<BitVec> = Vec::new();
        let mut pair_z: Vec<BitVec> = Vec::new();
        for (block, state) in blocks {
            let code = level1_code(block)?;
            let off = t.qubits.len();
            t.qubits.extend(block.qubits());
            t.parts.push(off..t.qubits.len());
            t.t = t.t.min((code.d - 1) / 2);
            for s in code.stabilizer_supports(Basis::X) {
                t.x_group.push(local(n, off, &s));
                t.x_checks.push(local(n, off, &s));
            }
            for s in code.stabilizer_supports(Basis::Z) {
                t.z_group.push(local(n, off, &s));
                t.z_checks.push(local(n, off, &s));
            }
            let (lx, lz) = (code.logical_supports(Basis::X), code.logical_supports(Basis::Z));
            match state {
                Some(Basis::Z) => t.z_group.extend(lz.iter().map(|s| local(n, off, s))),
                Some(Basis::X) => t.x_group.extend(lx.iter().map(|s| local(n, off, s))),
                None => {
                    for (k, s) in lx.iter().enumerate() {
                        let v = local(n, off, s);
                        match pair_x.get_mut(k) {
                            Some(p) => p.xor_assign(&v),
                            None => pair_x.push(v),
                        }
                    }
                    for (k, s) in lz.iter().enumerate() {
                        let v = local(n, off, s);
                        match pair_z.get_mut(k) {
                            Some(p) => p.xor_assign(&v),
                            None => pair_z.push(v),
                        }
                    }
                }
            }
        }
        if bell {
            t.x_group.extend(pair_x);
            t.z_group.extend(pair_z);
        }
        Ok(t)
    }

    fn verdict_part(&self, e: &BitVec, group: &[BitVec], checks: &[BitVec]) -> Verdict {
        let mut ech = Echelon::new();
        for g in group {
            ech.insert(g);
        }
        if ech.contains(e) {
            return Verdict::Trivial;
        }
        if self.t >= 1 {
            // One single-qubit correction per part (or none).
            let mut options: Vec<Vec<Option<usize>>> = vec![vec![None]];
            for part in &self.parts {
                let mut next = Vec::new();
                for o in &options {
                    for q in std::iter::once(None).chain(part.clone().map(Some)) {
                        let mut o = o.clone();
                        o.push(q);
                        next.push(o);
                    }
                }
                options = next;
            }
            for o in options {
                let mut f = e.clone();
                for q in o.into_iter().flatten() {
                    f.set(q, !f.get(q));
                }
                if ech.contains(&f) {
                    return Verdict::Correctable;
                }
            }
        }
        if checks.iter().any(|c| c.dot(e)) {
            Verdict::Detectable
        } else {
            Verdict::Harmful
        }
    }

    /// Worst verdict over the X and Z parts of a deviation.
    pub fn classify(&self, d: &Deviation) -> Verdict {
        let vx = self.verdict_part(&d.x, &self.x_group, &self.z_checks);
        let vz = self.verdict_part(&d.z, &self.z_group, &self.x_checks);
        vx.max(vz)
    }

    /// Whether a single fault leading to `d` is tolerated: flagged, or leaves
    /// a deviation that the next level can correct (distance 3) or detect
    /// (distance 2).
    pub fn acceptable(&self, d: &Deviation) -> bool {
        if d.flagged {
            return true;
        }
        match self.classify(d) {
            Verdict::Trivial | Verdict::Correctable => true,
            Verdict::Detectable => self.t == 0,
            Verdict::Harmful => false,
        }
    }
}

fn options() -> FrameOptions {
    let mut o = FrameOptions::new(NoiseParams::noiseless());
    o.randomize = false;
    o.verify = VerifyMode::RecordOnly;
    o
}

fn deviations(engine: &Engine, target: &Target, injection: &Injection, lanes: usize) -> Vec<Deviation> {
    let out = engine.run_batch(&options(), 0, 0, u64::MAX, Some(injection));
    let flagged = out.segment_failed.iter().fold(out.erased, |a, &m| a | m);
    let n = target.qubits.len();
    (0..lanes)
        .map(|lane| {
            let bit = 1u64 << lane;
            let mut x = BitVec::zeros(n);
            let mut z = BitVec::zeros(n);
            for (i, &q) in target.qubits.iter().enumerate() {
                x.set(i, out.x[q as usize] & bit != 0);
                z.set(i, out.z[q as usize] & bit != 0);
            }
            Deviation { flagged: flagged & bit != 0, x, z }
        })
        .collect()
}

/// Deviation after injecting `faults` as `(location, fault bits)`.
pub fn deviation(g: &GadgetCircuit, target: &Target, faults: &[(u32, u8)]) -> Result<Deviation> {
    let engine = Engine::new(&g.circuit)?;
    let mut inj = Injection::default();
    for &(loc, bits) in faults {
        inj.add(loc, 1, bits);
    }
    Ok(deviations(&engine, target, &inj, 1).remove(0))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FaultReport {
    pub faults: usize,
    pub flagged: usize,
    /// Unflagged faults leaving a trivial deviation.
    pub trivial: usize,
    /// Unacceptable faults as `(location, fault bits)`.
    pub bad: Vec<(u32, u8)>,
}

/// Runs every single fault of every noisy location of the gadget.
pub fn single_faults(g: &GadgetCircuit, target: &Target) -> Result<FaultReport> {
    let engine = Engine::new(&g.circuit)?;
    let mut all: Vec<(u32, u8)> = Vec::new();
    for (i, loc) in g.circuit.locations.iter().enumerate() {
        if loc.noisy {
            for c in 1..=channel_size(loc.kind) {
                all.push((i as u32, fault_bits(loc.kind, c)));
            }
        }
    }
    let mut report = FaultReport { faults: all.len(), ..FaultReport::default() };
    for chunk in all.chunks(LANES) {
        let mut inj = Injection::default();
        for (lane, &(loc, bits)) in chunk.iter().enumerate() {
            inj.add(loc, 1 << lane, bits);
        }
        for (d, &fault) in deviations(&engine, target, &inj, chunk.len()).iter().zip(chunk) {
            if d.flagged {
                report.flagged += 1;
            } else if target.classify(d) == Verdict::Trivial {
                report.trivial += 1;
            }
            if !target.acceptable(d) {
                report.bad.push(fault);
            }
        }
    }
    Ok(report)
}
