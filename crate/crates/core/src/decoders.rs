//! Hard-decision decoders for the concatenated codes.
//!
//! Every decoder comes in two forms: a scalar function over [`Outcome`]s and
//! a bit-sliced form over 64 shots at once, where an outcome is a pair of
//! planes `(value, erased)`. The C4 and C6 formulas are kept in their printed
//! form (`decode_c4`, `decode_c6`); the `*_logical` wrappers translate to and
//! from the logical operator definitions in [`crate::codes`].

use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Basis;
use crate::codes::hamming_code;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Zero,
    One,
    E,
}

impl Outcome {
    pub fn bit(b: bool) -> Outcome {
        if b {
            Outcome::One
        } else {
            Outcome::Zero
        }
    }

    pub fn is_erased(self) -> bool {
        self == Outcome::E
    }

    /// Value of a non-erased outcome.
    pub fn value(self) -> Option<bool> {
        match self {
            Outcome::Zero => Some(false),
            Outcome::One => Some(true),
            Outcome::E => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecoderKind {
    C4 { basis: Basis },
    C6 { basis: Basis },
    Steane,
    C4SteaneL2,
    Hamming { r: u8, basis: Basis },
}

impl DecoderKind {
    pub fn n_inputs(self) -> usize {
        match self {
            DecoderKind::C4 { .. } => 4,
            DecoderKind::C6 { .. } => 6,
            DecoderKind::Steane | DecoderKind::C4SteaneL2 => 7,
            DecoderKind::Hamming { r, .. } => (1usize << r) - 1,
        }
    }

    pub fn n_outputs(self) -> usize {
        match self {
            DecoderKind::C4 { .. } | DecoderKind::C6 { .. } => 2,
            DecoderKind::Steane | DecoderKind::C4SteaneL2 => 1,
            DecoderKind::Hamming { r, .. } => hamming_tables(r).k,
        }
    }
}

fn b(x: bool) -> u8 {
    x as u8
}

/// C4 decoder in the printed output order: `(m1+m2, m2+m4)` for Z and
/// `(m1+m3, m3+m4)` for X, or `(E, E)` on odd parity.
pub fn decode_c4(m: [bool; 4], basis: Basis) -> (Outcome, Outcome) {
    if m.iter().filter(|&&x| x).count() % 2 == 1 {
        return (Outcome::E, Outcome::E);
    }
    match basis {
        Basis::Z => (Outcome::bit(m[0] ^ m[1]), Outcome::bit(m[1] ^ m[3])),
        Basis::X => (Outcome::bit(m[0] ^ m[2]), Outcome::bit(m[2] ^ m[3])),
    }
}

/// C4 decoder returning `(logical 1, logical 2)`. The printed formulas yield
/// the two logical values in reverse order in both bases.
pub fn decode_c4_logical(m: [bool; 4], basis: Basis) -> [Outcome; 2] {
    let (o0, o1) = decode_c4(m, basis);
    [o1, o0]
}

fn pair_erased(p: (Outcome, Outcome)) -> bool {
    p.0.is_erased() || p.1.is_erased()
}

/// C6 decoder over three lower-level pairs, in the printed form and input order.
pub fn decode_c6(pairs: [(Outcome, Outcome); 3], basis: Basis) -> (Outcome, Outcome) {
    let erased: Vec<usize> = (0..3).filter(|&i| pair_erased(pairs[i])).collect();
    if erased.len() >= 2 {
        return (Outcome::E, Outcome::E);
    }
    let v = |p: (Outcome, Outcome)| (p.0.value().unwrap_or(false), p.1.value().unwrap_or(false));
    let (m1, m2) = v(pairs[0]);
    let (m3, m4) = v(pairs[1]);
    let (m5, m6) = v(pairs[2]);
    let out = |a: bool, c: bool| (Outcome::bit(a), Outcome::bit(c));
    let erased_first = |m1: bool, m2: bool, m3: bool, m4: bool, m5: bool, m6: bool| match erased[0] {
        0 => out(m3 ^ m4 ^ m6, m4 ^ m5),
        1 => out(m1 ^ m2 ^ m5, m2 ^ m5 ^ m6),
        _ => out(m2 ^ m3, m1 ^ m3 ^ m4),
    };
    if erased.len() == 1 {
        return erased_first(m1, m2, m3, m4, m5, m6);
    }
    if m1 ^ m3 ^ m5 || m2 ^ m4 ^ m6 {
        return (Outcome::E, Outcome::E);
    }
    match basis {
        Basis::Z => out(m2 ^ m3, m1 ^ m3 ^ m4),
        Basis::X => out(m3 ^ m4 ^ m6, m4 ^ m5),
    }
}

/// Input map from the logical values `(a, b)` of the `n`-th lower-level block
/// to the printed decoder's pair: swap, `(a+b, b)`, `(a, a+b)`.
fn c6_input(n: usize, a: bool, c: bool) -> (bool, bool) {
    match n {
        0 => (c, a),
        1 => (a ^ c, c),
        _ => (a, a ^ c),
    }
}

fn c6_output(basis: Basis, o0: bool, o1: bool) -> [bool; 2] {
    match basis {
        Basis::Z => [o0 ^ o1, o1],
        Basis::X => [o1, o0],
    }
}

/// C6 decoder over the logical values of the three lower-level blocks, returning
/// the C6 logical values in the order of the code's logical operators.
pub fn decode_c6_logical(pairs: [[Outcome; 2]; 3], basis: Basis) -> [Outcome; 2] {
    let mut mapped = [(Outcome::Zero, Outcome::Zero); 3];
    for n in 0..3 {
        let p = pairs[n];
        mapped[n] = if p[0].is_erased() || p[1].is_erased() {
            (Outcome::E, Outcome::E)
        } else {
            let (x, y) = c6_input(n, p[0] == Outcome::One, p[1] == Outcome::One);
            (Outcome::bit(x), Outcome::bit(y))
        };
    }
    match decode_c6(mapped, basis) {
        (Outcome::E, _) | (_, Outcome::E) => [Outcome::E, Outcome::E],
        (o0, o1) => {
            let v = c6_output(basis, o0 == Outcome::One, o1 == Outcome::One);
            [Outcome::bit(v[0]), Outcome::bit(v[1])]
        }
    }
}

fn steane_syndrome(m: &[bool; 7]) -> usize {
    let a1 = m[0] ^ m[2] ^ m[4] ^ m[6];
    let a2 = m[1] ^ m[2] ^ m[5] ^ m[6];
    let a3 = m[3] ^ m[4] ^ m[5] ^ m[6];
    b(a1) as usize + 2 * b(a2) as usize + 4 * b(a3) as usize
}

pub fn decode_steane(m: [bool; 7]) -> bool {
    let i = steane_syndrome(&m);
    m[0] ^ m[1] ^ m[2] ^ (1..=3).contains(&i)
}

/// Level-2 C4/Steane decoder: two erased blocks are filled in by the unique
/// codeword completion when it exists; otherwise erasures read as 0 and the
/// Steane decoder is applied.
pub fn decode_c4_steane_l2(m: [Outcome; 7]) -> bool {
    let erased: Vec<usize> = (0..7).filter(|&i| m[i].is_erased()).collect();
    let mut bits = [false; 7];
    for i in 0..7 {
        bits[i] = m[i] == Outcome::One;
    }
    if erased.len() == 2 {
        for fill in 0..4u8 {
            let mut t = bits;
            t[erased[0]] = fill & 1 == 1;
            t[erased[1]] = fill & 2 == 2;
            if steane_syndrome(&t) == 0 {
                return t[0] ^ t[1] ^ t[2];
            }
        }
    }
    decode_steane(bits)
}

/// Syndrome decoder tables for a quantum Hamming code.
#[derive(Clone, Debug)]
pub struct HammingTables {
    pub r: u8,
    pub n: usize,
    pub k: usize,
    /// Qubit indices (0-based) of each logical X representative.
    pub x_support: Vec<Vec<usize>>,
    /// Qubit indices (0-based) of each logical Z representative.
    pub z_support: Vec<Vec<usize>>,
}

impl HammingTables {
    pub fn support(&self, basis: Basis) -> &[Vec<usize>] {
        match basis {
            Basis::X => &self.x_support,
            Basis::Z => &self.z_support,
        }
    }
}

pub fn hamming_tables(r: u8) -> &'static HammingTables {
    static TABLES: OnceLock<Vec<HammingTables>> = OnceLock::new();
    let all = TABLES.get_or_init(|| {
        (3..=8u8)
            .map(|r| {
                let code = hamming_code(r).expect("valid r");
                HammingTables {
                    r,
                    n: code.n,
                    k: code.k,
                    x_support: code.logical_x.iter().map(|p| p.support()).collect(),
                    z_support: code.logical_z.iter().map(|p| p.support()).collect(),
                }
            })
            .collect()
    });
    &all[(r - 3) as usize]
}

/// Hamming syndrome decoder: bit `t` of the syndrome is the parity over
/// positions `j` (1-based) whose binary expansion has bit `t` set; the syndrome
/// names the flipped position, which is corrected before reading each logical.
pub fn decode_hamming(m: &[bool], r: u8, basis: Basis) -> Vec<bool> {
    let t = hamming_tables(r);
    assert_eq!(m.len(), t.n, "expected {} outcomes", t.n);
    let mut pos = 0usize;
    for (j, &v) in m.iter().enumerate() {
        if v {
            pos ^= j + 1;
        }
    }
    t.support(basis)
        .iter()
        .map(|s| s.iter().fold(false, |acc, &q| acc ^ m[q]) ^ (pos != 0 && s.contains(&(pos - 1))))
        .collect()
}

/// How a Knill teleportation treats decoded outcomes that are erased.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KnillMode {
    Correction,
    Detection,
}

/// Logical Pauli byproduct on one teleported logical qubit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FrameCorrection {
    pub x: bool,
    pub z: bool,
}

/// Byproduct corrections from decoded X outcomes of the data block and Z
/// outcomes of the Bell half: `X^{m_z} Z^{m_x}` per logical qubit. In
/// correction mode erased outcomes are replaced by random bits; in detection
/// mode any erasure returns `None`.
pub fn knill_frame_update<R: Rng>(
    x_outcomes: &[Outcome],
    z_outcomes: &[Outcome],
    mode: KnillMode,
    rng: &mut R,
) -> Option<Vec<FrameCorrection>> {
    assert_eq!(x_outcomes.len(), z_outcomes.len());
    let mut resolve = |o: Outcome| -> Option<bool> {
        match (o, mode) {
            (Outcome::E, KnillMode::Correction) => Some(rng.gen()),
            (Outcome::E, KnillMode::Detection) => None,
            (o, _) => o.value(),
        }
    };
    x_outcomes
        .iter()
        .zip(z_outcomes)
        .map(|(&mx, &mz)| Some(FrameCorrection { x: resolve(mz)?, z: resolve(mx)? }))
        .collect()
}

/// Runs a decoder on scalar inputs, returning one outcome per logical qubit.
pub fn decode_outcomes(kind: DecoderKind, m: &[Outcome]) -> Vec<Outcome> {
    assert_eq!(m.len(), kind.n_inputs(), "{kind:?} input count");
    let bit = |o: Outcome| o == Outcome::One;
    match kind {
        DecoderKind::C4 { basis } => {
            if m.iter().any(|o| o.is_erased()) {
                return vec![Outcome::E, Outcome::E];
            }
            decode_c4_logical([bit(m[0]), bit(m[1]), bit(m[2]), bit(m[3])], basis).to_vec()
        }
        DecoderKind::C6 { basis } => {
            let pair = |n: usize| {
                if m[2 * n].is_erased() || m[2 * n + 1].is_erased() {
                    [Outcome::E, Outcome::E]
                } else {
                    [m[2 * n], m[2 * n + 1]]
                }
            };
            decode_c6_logical([pair(0), pair(1), pair(2)], basis).to_vec()
        }
        DecoderKind::Steane => {
            let mut b = [false; 7];
            for i in 0..7 {
                b[i] = bit(m[i]);
            }
            vec![Outcome::bit(decode_steane(b))]
        }
        DecoderKind::C4SteaneL2 => {
            let mut o = [Outcome::Zero; 7];
            o.copy_from_slice(m);
            vec![Outcome::bit(decode_c4_steane_l2(o))]
        }
        DecoderKind::Hamming { r, basis } => {
            let b: Vec<bool> = m.iter().map(|&o| bit(o)).collect();
            decode_hamming(&b, r, basis).into_iter().map(Outcome::bit).collect()
        }
    }
}

/// Bit-sliced counterpart of [`decode_outcomes`].
pub fn decode_planes(kind: DecoderKind, m: &[sliced::Planes], out: &mut [sliced::Planes]) {
    match kind {
        DecoderKind::C4 { basis } => {
            let r = sliced::c4_logical([m[0], m[1], m[2], m[3]], basis);
            out[..2].copy_from_slice(&r);
        }
        DecoderKind::C6 { basis } => {
            let r = sliced::c6_logical([m[0], m[1], m[2], m[3], m[4], m[5]], basis);
            out[..2].copy_from_slice(&r);
        }
        DecoderKind::Steane => out[0] = sliced::steane([m[0], m[1], m[2], m[3], m[4], m[5], m[6]]),
        DecoderKind::C4SteaneL2 => out[0] = sliced::c4_steane_l2([m[0], m[1], m[2], m[3], m[4], m[5], m[6]]),
        DecoderKind::Hamming { r, basis } => sliced::hamming(m, r, basis, out),
    }
}

/// Bit-sliced decoders: 64 shots per word, an outcome is `(value, erased)`.
pub mod sliced {
    use super::*;

    #[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
    pub struct Planes {
        pub v: u64,
        pub e: u64,
    }

    pub fn c4_logical(m: [Planes; 4], basis: Basis) -> [Planes; 2] {
        let e = m[0].e | m[1].e | m[2].e | m[3].e | (m[0].v ^ m[1].v ^ m[2].v ^ m[3].v);
        let (o0, o1) = match basis {
            Basis::Z => (m[0].v ^ m[1].v, m[1].v ^ m[3].v),
            Basis::X => (m[0].v ^ m[2].v, m[2].v ^ m[3].v),
        };
        [Planes { v: o1 & !e, e }, Planes { v: o0 & !e, e }]
    }

    pub fn c6_logical(m: [Planes; 6], basis: Basis) -> [Planes; 2] {
        let pe = [m[0].e | m[1].e, m[2].e | m[3].e, m[4].e | m[5].e];
        let mut mv = [0u64; 6];
        for n in 0..3 {
            let (a, c) = (m[2 * n].v, m[2 * n + 1].v);
            let (x, y) = match n {
                0 => (c, a),
                1 => (a ^ c, c),
                _ => (a, a ^ c),
            };
            mv[2 * n] = x & !pe[n];
            mv[2 * n + 1] = y & !pe[n];
        }
        let [m1, m2, m3, m4, m5, m6] = mv;
        let e0 = pe[0] & !pe[1] & !pe[2];
        let e1 = pe[1] & !pe[0] & !pe[2];
        let e2 = pe[2] & !pe[0] & !pe[1];
        let none = !(pe[0] | pe[1] | pe[2]);
        let multi = !(none | e0 | e1 | e2);
        let fail = none & ((m1 ^ m3 ^ m5) | (m2 ^ m4 ^ m6));
        let f0 = (m3 ^ m4 ^ m6, m4 ^ m5);
        let f1 = (m1 ^ m2 ^ m5, m2 ^ m5 ^ m6);
        let f2 = (m2 ^ m3, m1 ^ m3 ^ m4);
        let fn_ = match basis {
            Basis::Z => f2,
            Basis::X => f0,
        };
        let o0 = (e0 & f0.0) | (e1 & f1.0) | (e2 & f2.0) | (none & fn_.0);
        let o1 = (e0 & f0.1) | (e1 & f1.1) | (e2 & f2.1) | (none & fn_.1);
        let e = multi | fail;
        let (t0, t1) = match basis {
            Basis::Z => (o0 ^ o1, o1),
            Basis::X => (o1, o0),
        };
        [Planes { v: t0 & !e, e }, Planes { v: t1 & !e, e }]
    }

    fn steane_bits(m: [u64; 7]) -> u64 {
        let a1 = m[0] ^ m[2] ^ m[4] ^ m[6];
        let a2 = m[1] ^ m[2] ^ m[5] ^ m[6];
        let a3 = m[3] ^ m[4] ^ m[5] ^ m[6];
        let i1 = a1 & !a2 & !a3;
        let i2 = !a1 & a2 & !a3;
        let i3 = a1 & a2 & !a3;
        m[0] ^ m[1] ^ m[2] ^ i1 ^ i2 ^ i3
    }

    pub fn steane(m: [Planes; 7]) -> Planes {
        Planes { v: steane_bits(m.map(|p| p.v)), e: 0 }
    }

    pub fn c4_steane_l2(m: [Planes; 7]) -> Planes {
        let any_e = m.iter().fold(0, |a, p| a | p.e);
        let mut v = steane_bits(m.map(|p| p.v & !p.e));
        let mut lanes = any_e;
        while lanes != 0 {
            let lane = lanes.trailing_zeros();
            lanes &= lanes - 1;
            let outcomes = m.map(|p| {
                if p.e >> lane & 1 == 1 {
                    Outcome::E
                } else {
                    Outcome::bit(p.v >> lane & 1 == 1)
                }
            });
            let bit = decode_c4_steane_l2(outcomes) as u64;
            v = (v & !(1u64 << lane)) | (bit << lane);
        }
        Planes { v, e: 0 }
    }

    pub fn hamming(m: &[Planes], r: u8, basis: Basis, out: &mut [Planes]) {
        let t = hamming_tables(r);
        let mut syn = [0u64; 8];
        for (j, p) in m.iter().enumerate() {
            for (bit, s) in syn.iter_mut().enumerate().take(r as usize) {
                if (j + 1) >> bit & 1 == 1 {
                    *s ^= p.v;
                }
            }
        }
        let mut corrected: Vec<u64> = Vec::with_capacity(t.n);
        for (j, p) in m.iter().enumerate() {
            let pos = j + 1;
            let mut hit = !0u64;
            for (bit, s) in syn.iter().enumerate().take(r as usize) {
                hit &= if pos >> bit & 1 == 1 { *s } else { !*s };
            }
            corrected.push(p.v ^ hit);
        }
        for (o, s) in out.iter_mut().zip(t.support(basis)) {
            *o = Planes { v: s.iter().fold(0, |a, &q| a ^ corrected[q]), e: 0 };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{c4_code, c6_code};
    use proptest::prelude::*;
    use rand::SeedableRng;

    use Outcome::{One as I1, Zero as O, E};

    fn bits(v: u32, n: usize) -> Vec<bool> {
        (0..n).map(|i| v >> i & 1 == 1).collect()
    }

    #[test]
    fn c4_examples() {
        assert_eq!(decode_c4([false; 4], Basis::Z), (O, O));
        assert_eq!(decode_c4([true, false, false, false], Basis::Z), (E, E));
        assert_eq!(decode_c4([true, true, false, false], Basis::Z), (O, I1));
    }

    fn parity(v: &[bool], support: &[usize]) -> bool {
        support.iter().fold(false, |a, &q| a ^ v[q])
    }

    #[test]
    fn c4_round_trip_and_detection() {
        let code = c4_code();
        for basis in [Basis::X, Basis::Z] {
            let (stabs, logs) = match basis {
                Basis::Z => (&code.z_stabilizers, &code.logical_z),
                Basis::X => (&code.x_stabilizers, &code.logical_x),
            };
            for v in 0..16 {
                let m = bits(v, 4);
                let valid = stabs.iter().all(|s| !parity(&m, &s.support()));
                let got = decode_c4_logical([m[0], m[1], m[2], m[3]], basis);
                if valid {
                    let want: Vec<Outcome> = logs.iter().map(|l| Outcome::bit(parity(&m, &l.support()))).collect();
                    assert_eq!(got.to_vec(), want, "{basis:?} {m:?}");
                } else {
                    assert_eq!(got, [E, E]);
                }
            }
        }
    }

    #[test]
    fn c6_examples() {
        let z = (O, O);
        assert_eq!(decode_c6([z, z, z], Basis::Z), (O, O));
        assert_eq!(decode_c6([(E, E), z, z], Basis::Z), (O, O));
        assert_eq!(decode_c6([(I1, O), z, z], Basis::Z), (E, E));
        assert_eq!(decode_c6([(E, E), (E, E), z], Basis::X), (E, E));
    }

    #[test]
    fn c6_round_trip_all_codewords_and_erasures() {
        let code = c6_code();
        for basis in [Basis::X, Basis::Z] {
            let (stabs, logs) = match basis {
                Basis::Z => (&code.z_stabilizers, &code.logical_z),
                Basis::X => (&code.x_stabilizers, &code.logical_x),
            };
            for v in 0..64 {
                let m = bits(v, 6);
                let valid = stabs.iter().all(|s| !parity(&m, &s.support()));
                let pairs = [[m[0], m[1]], [m[2], m[3]], [m[4], m[5]]].map(|p| p.map(Outcome::bit));
                let got = decode_c6_logical(pairs, basis);
                if !valid {
                    assert_eq!(got, [E, E], "{basis:?} {m:?}");
                    continue;
                }
                let want: Vec<Outcome> = logs.iter().map(|l| Outcome::bit(parity(&m, &l.support()))).collect();
                assert_eq!(got.to_vec(), want, "{basis:?} {m:?}");
                for erased in 0..3 {
                    let mut p = pairs;
                    p[erased] = [E, E];
                    assert_eq!(decode_c6_logical(p, basis).to_vec(), want, "{basis:?} {m:?} erase {erased}");
                    let mut p2 = p;
                    p2[(erased + 1) % 3] = [E, E];
                    assert_eq!(decode_c6_logical(p2, basis), [E, E]);
                }
            }
        }
    }

    #[test]
    fn steane_examples() {
        assert!(!decode_steane([false; 7]));
        assert!(!decode_steane([true, false, false, false, false, false, false]));
        assert!(decode_steane([true, true, true, false, false, false, false]));
    }

    #[test]
    fn c4_steane_l2_examples() {
        assert!(!decode_c4_steane_l2([O; 7]));
        assert!(!decode_c4_steane_l2([E, E, O, O, O, O, O]));
        // m3..m7 = 1,0,0,0,0 forces m1 = m2 = 1 (codeword 1110000).
        assert!(decode_c4_steane_l2([E, E, I1, O, O, O, O]));
        // Brute-force oracle over all two-erasure patterns.
        for v in 0..128u32 {
            let m = bits(v, 7);
            for i in 0..7 {
                for j in (i + 1)..7 {
                    let mut o = m.iter().map(|&x| Outcome::bit(x)).collect::<Vec<_>>();
                    o[i] = E;
                    o[j] = E;
                    let mut found = None;
                    for fill in 0..4 {
                        let mut t = m.clone();
                        t[i] = fill & 1 == 1;
                        t[j] = fill & 2 == 2;
                        let ok = !(t[0] ^ t[2] ^ t[4] ^ t[6]) && !(t[1] ^ t[2] ^ t[5] ^ t[6]) && !(t[3] ^ t[4] ^ t[5] ^ t[6]);
                        if ok {
                            found = Some(t[0] ^ t[1] ^ t[2]);
                        }
                    }
                    let mut zeroed = m.clone();
                    zeroed[i] = false;
                    zeroed[j] = false;
                    let want = found.unwrap_or_else(|| decode_steane(zeroed.try_into().unwrap()));
                    assert_eq!(decode_c4_steane_l2(o.try_into().unwrap()), want);
                }
            }
        }
    }

    #[test]
    fn hamming_q3_matches_steane_everywhere() {
        for v in 0..128 {
            let m = bits(v, 7);
            for basis in [Basis::X, Basis::Z] {
                assert_eq!(decode_hamming(&m, 3, basis), vec![decode_steane(m.clone().try_into().unwrap())]);
            }
        }
    }

    #[test]
    fn hamming_single_flips_corrected() {
        for r in 3..=5u8 {
            let t = hamming_tables(r);
            assert_eq!(decode_hamming(&vec![false; t.n], r, Basis::Z), vec![false; t.k]);
            for j in 0..t.n {
                let mut m = vec![false; t.n];
                m[j] = true;
                assert_eq!(decode_hamming(&m, r, Basis::Z), vec![false; t.k], "r={r} j={j}");
            }
        }
    }

    #[test]
    fn knill_update_rules() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let c = knill_frame_update(&[O, O], &[O, O], KnillMode::Correction, &mut rng).unwrap();
        assert_eq!(c, vec![FrameCorrection::default(); 2]);
        let c = knill_frame_update(&[O], &[I1], KnillMode::Correction, &mut rng).unwrap();
        assert_eq!(c, vec![FrameCorrection { x: true, z: false }]);
        assert!(knill_frame_update(&[E], &[O], KnillMode::Detection, &mut rng).is_none());
        let mut ones = 0;
        for _ in 0..10_000 {
            let c = knill_frame_update(&[E], &[E], KnillMode::Correction, &mut rng).unwrap();
            ones += c[0].x as u32;
        }
        // 4 sigma band around 5000.
        assert!((ones as i32 - 5000).abs() < 200, "{ones}");
    }

    fn planes_of(o: &[Outcome], lane: usize, acc: &mut [sliced::Planes]) {
        for (p, &x) in acc.iter_mut().zip(o) {
            match x {
                O => {}
                I1 => p.v |= 1 << lane,
                E => p.e |= 1 << lane,
            }
        }
    }

    fn lane_of(p: sliced::Planes, lane: usize) -> Outcome {
        if p.e >> lane & 1 == 1 {
            E
        } else {
            Outcome::bit(p.v >> lane & 1 == 1)
        }
    }

    fn outcome() -> impl Strategy<Value = Outcome> {
        prop_oneof![Just(O), Just(I1), Just(E)]
    }

    proptest! {
        #[test]
        fn sliced_c6_matches_scalar(inputs in proptest::collection::vec(proptest::collection::vec(outcome(), 6), 64), z in any::<bool>()) {
            let basis = if z { Basis::Z } else { Basis::X };
            let mut acc = [sliced::Planes::default(); 6];
            for (lane, inp) in inputs.iter().enumerate() {
                // C4 and C6 erase pairs jointly.
                let mut inp = inp.clone();
                for n in 0..3 {
                    if inp[2 * n] == E || inp[2 * n + 1] == E {
                        inp[2 * n] = E;
                        inp[2 * n + 1] = E;
                    }
                }
                planes_of(&inp, lane, &mut acc);
            }
            let out = sliced::c6_logical(acc, basis);
            for (lane, inp) in inputs.iter().enumerate() {
                let pairs = [[inp[0], inp[1]], [inp[2], inp[3]], [inp[4], inp[5]]];
                let want = decode_c6_logical(pairs, basis);
                prop_assert_eq!([lane_of(out[0], lane), lane_of(out[1], lane)], want);
            }
        }

        #[test]
        fn sliced_c4_and_steane_match_scalar(words in proptest::collection::vec(any::<u64>(), 7), z in any::<bool>()) {
            let basis = if z { Basis::Z } else { Basis::X };
            let p: Vec<sliced::Planes> = words.iter().map(|&v| sliced::Planes { v, e: 0 }).collect();
            let c4 = sliced::c4_logical([p[0], p[1], p[2], p[3]], basis);
            let st = sliced::steane([p[0], p[1], p[2], p[3], p[4], p[5], p[6]]);
            for lane in 0..64 {
                let m: Vec<bool> = words.iter().map(|w| w >> lane & 1 == 1).collect();
                let want = decode_c4_logical([m[0], m[1], m[2], m[3]], basis);
                prop_assert_eq!([lane_of(c4[0], lane), lane_of(c4[1], lane)], want);
                prop_assert_eq!(st.v >> lane & 1 == 1, decode_steane(m.clone().try_into().unwrap()));
            }
        }

        #[test]
        fn sliced_c4_steane_matches_scalar(inputs in proptest::collection::vec(proptest::collection::vec(outcome(), 7), 64)) {
            let mut acc = [sliced::Planes::default(); 7];
            for (lane, inp) in inputs.iter().enumerate() {
                planes_of(inp, lane, &mut acc);
            }
            let out = sliced::c4_steane_l2(acc);
            for (lane, inp) in inputs.iter().enumerate() {
                prop_assert_eq!(out.v >> lane & 1 == 1, decode_c4_steane_l2(inp.clone().try_into().unwrap()));
            }
        }

        #[test]
        fn sliced_hamming_matches_scalar(words in proptest::collection::vec(any::<u64>(), 31), z in any::<bool>()) {
            let basis = if z { Basis::Z } else { Basis::X };
            let p: Vec<sliced::Planes> = words.iter().map(|&v| sliced::Planes { v, e: 0 }).collect();
            let mut out = vec![sliced::Planes::default(); 21];
            sliced::hamming(&p, 5, basis, &mut out);
            for lane in 0..64 {
                let m: Vec<bool> = words.iter().map(|w| w >> lane & 1 == 1).collect();
                let want = decode_hamming(&m, 5, basis);
                let got: Vec<bool> = out.iter().map(|o| o.v >> lane & 1 == 1).collect();
                prop_assert_eq!(got, want);
            }
        }
    }
}
