//! Code blocks as trees of lower-level blocks, with logical operator supports
//! and the qubit relabelings that act as logical gates on two-qubit blocks.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::circuit::{Basis, Qubit};
use crate::codes::hamming_k;
use crate::decoders::hamming_tables;
use crate::error::{Error, Result};
use crate::gf2::{gl2, mat2_inverse, mat2_transpose, Mat2};

/// Code of one concatenation level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeCode {
    /// Four physical qubits.
    C4,
    /// Three two-qubit blocks.
    C6,
    /// Seven blocks; logical `j` is the Steane code over logical `j` of each child.
    Steane,
    /// `N_r` physical qubits.
    Hamming(u8),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Block {
    Qubit(Qubit),
    Node { code: NodeCode, children: Vec<Block> },
}

const C4_X: [&[usize]; 2] = [&[0, 1], &[1, 3]];
const C4_Z: [&[usize]; 2] = [&[0, 2], &[2, 3]];
const C6_X: [&[usize]; 2] = [&[1, 2], &[0, 2, 3]];
const C6_Z: [&[usize]; 2] = [&[2, 3, 5], &[3, 4]];
const C6_STABS: [&[usize]; 2] = [&[0, 3, 4, 5], &[0, 1, 2, 5]];

impl Block {
    pub fn node(code: NodeCode, children: Vec<Block>) -> Block {
        Block::Node { code, children }
    }

    pub fn level(&self) -> usize {
        match self {
            Block::Qubit(_) => 0,
            Block::Node { children, .. } => 1 + children[0].level(),
        }
    }

    pub fn children(&self) -> &[Block] {
        match self {
            Block::Qubit(_) => &[],
            Block::Node { children, .. } => children,
        }
    }

    pub fn code(&self) -> Option<NodeCode> {
        match self {
            Block::Qubit(_) => None,
            Block::Node { code, .. } => Some(*code),
        }
    }

    /// Number of logical qubits.
    pub fn k(&self) -> usize {
        match self {
            Block::Qubit(_) => 1,
            Block::Node { code, children } => match code {
                NodeCode::C4 | NodeCode::C6 => 2,
                NodeCode::Steane => children[0].k(),
                NodeCode::Hamming(r) => hamming_k(*r) as usize * children[0].k(),
            },
        }
    }

    /// Physical qubits in tree order.
    pub fn qubits(&self) -> Vec<Qubit> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<Qubit>) {
        match self {
            Block::Qubit(q) => out.push(*q),
            Block::Node { children, .. } => children.iter().for_each(|c| c.collect(out)),
        }
    }

    /// `(child, child logical)` slots in the support of logical `i`.
    pub fn slots(&self, basis: Basis, i: usize) -> Vec<(usize, usize)> {
        let Block::Node { code, children } = self else { return Vec::new() };
        let kc = children[0].k();
        match code {
            NodeCode::C4 => {
                let s = if basis == Basis::X { C4_X[i] } else { C4_Z[i] };
                s.iter().map(|&n| (n, 0)).collect()
            }
            NodeCode::C6 => {
                let s = if basis == Basis::X { C6_X[i] } else { C6_Z[i] };
                s.iter().map(|&s| (s / 2, s % 2)).collect()
            }
            NodeCode::Steane => (0..3).map(|n| (n, i)).collect(),
            NodeCode::Hamming(r) => {
                let (k, j) = (i / kc, i % kc);
                hamming_tables(*r).support(basis)[k].iter().map(|&n| (n, j)).collect()
            }
        }
    }

    /// Physical support of the logical X (or Z) operator `i`, sorted.
    pub fn logical_support(&self, basis: Basis, i: usize) -> Vec<Qubit> {
        match self {
            Block::Qubit(q) => vec![*q],
            Block::Node { children, .. } => {
                let mut count: HashMap<Qubit, bool> = HashMap::new();
                for (n, j) in self.slots(basis, i) {
                    for q in children[n].logical_support(basis, j) {
                        *count.entry(q).or_insert(false) ^= true;
                    }
                }
                let mut out: Vec<Qubit> = count.into_iter().filter(|&(_, odd)| odd).map(|(q, _)| q).collect();
                out.sort_unstable();
                out
            }
        }
    }

    /// Relabels a two-qubit block so that its logical Z values become `v u`
    /// for old values `u` (X values transform by the inverse transpose). Pure
    /// qubit permutation; no gates are emitted.
    pub fn relabel(&self, v: Mat2) -> Result<Block> {
        match self {
            Block::Node { code: NodeCode::C4, children } => {
                let perm = c4_table().get(&v).ok_or_else(|| Error::Contract(format!("singular relabel {v:?}")))?;
                Ok(Block::node(NodeCode::C4, perm.iter().map(|&p| children[p].clone()).collect()))
            }
            Block::Node { code: NodeCode::C6, children } => {
                let (sigma, a) = c6_table().get(&v).ok_or_else(|| Error::Contract(format!("singular relabel {v:?}")))?;
                let kids = (0..3).map(|n| children[sigma[n]].relabel(a[n])).collect::<Result<Vec<_>>>()?;
                Ok(Block::node(NodeCode::C6, kids))
            }
            _ => Err(Error::Unsupported("relabeling is defined for C4 and C6 blocks".into())),
        }
    }
}

fn mask(s: &[usize]) -> u32 {
    s.iter().fold(0, |m, &i| m | 1 << i)
}

/// Whether `f` equals `target` modulo the span of `stabs`.
fn congruent(f: u32, target: u32, stabs: &[u32]) -> bool {
    (0..1u32 << stabs.len()).any(|sel| {
        let s = stabs.iter().enumerate().filter(|(i, _)| sel >> i & 1 == 1).fold(0, |a, (_, &x)| a ^ x);
        f ^ s == target
    })
}

fn combine(v: Mat2, row: usize, logicals: [u32; 2]) -> u32 {
    (if v[2 * row] == 1 { logicals[0] } else { 0 }) ^ (if v[2 * row + 1] == 1 { logicals[1] } else { 0 })
}

fn c4_table() -> &'static HashMap<Mat2, [usize; 4]> {
    static T: OnceLock<HashMap<Mat2, [usize; 4]>> = OnceLock::new();
    T.get_or_init(|| {
        let mut table = HashMap::new();
        let stab = [0b1111u32];
        let lz = [mask(C4_Z[0]), mask(C4_Z[1])];
        let lx = [mask(C4_X[0]), mask(C4_X[1])];
        for perm in permutations(4) {
            let pullback = |s: &[usize]| s.iter().fold(0u32, |m, &i| m | 1 << perm[i]);
            for v in gl2() {
                let vx = mat2_transpose(mat2_inverse(v).unwrap());
                let ok = (0..2).all(|j| {
                    congruent(pullback(C4_Z[j]), combine(v, j, lz), &stab)
                        && congruent(pullback(C4_X[j]), combine(vx, j, lx), &stab)
                });
                if ok {
                    table.entry(v).or_insert([perm[0], perm[1], perm[2], perm[3]]);
                }
            }
        }
        table
    })
}

/// Old-slot functional of a new-slot functional `f` under child permutation
/// `sigma` and child maps `a` (new child values `a[n]` times old child values).
fn c6_pullback(f: u32, sigma: [usize; 3], a: [Mat2; 3]) -> u32 {
    let mut out = 0u32;
    for n in 0..3 {
        for j in 0..2 {
            if f >> (2 * n + j) & 1 == 1 {
                for m in 0..2 {
                    if a[n][2 * j + m] == 1 {
                        out ^= 1 << (2 * sigma[n] + m);
                    }
                }
            }
        }
    }
    out
}

type C6Relabel = ([usize; 3], [Mat2; 3]);

fn c6_table() -> &'static HashMap<Mat2, C6Relabel> {
    static T: OnceLock<HashMap<Mat2, C6Relabel>> = OnceLock::new();
    T.get_or_init(|| {
        let mut table = HashMap::new();
        let stabs = [mask(C6_STABS[0]), mask(C6_STABS[1])];
        let lz = [mask(C6_Z[0]), mask(C6_Z[1])];
        let lx = [mask(C6_X[0]), mask(C6_X[1])];
        let g = gl2();
        let inv_t = |m: Mat2| mat2_transpose(mat2_inverse(m).unwrap());
        for p in permutations(3) {
            let sigma = [p[0], p[1], p[2]];
            for &a0 in &g {
                for &a1 in &g {
                    for &a2 in &g {
                        let a = [a0, a1, a2];
                        let ax = [inv_t(a0), inv_t(a1), inv_t(a2)];
                        let stabs_ok = stabs.iter().all(|&s| {
                            congruent(c6_pullback(s, sigma, a), 0, &stabs)
                                && congruent(c6_pullback(s, sigma, ax), 0, &stabs)
                        });
                        if !stabs_ok {
                            continue;
                        }
                        for &v in &g {
                            if table.contains_key(&v) {
                                continue;
                            }
                            let vx = inv_t(v);
                            let ok = (0..2).all(|j| {
                                congruent(c6_pullback(lz[j], sigma, a), combine(v, j, lz), &stabs)
                                    && congruent(c6_pullback(lx[j], sigma, ax), combine(vx, j, lx), &stabs)
                            });
                            if ok {
                                table.insert(v, (sigma, a));
                            }
                        }
                    }
                }
            }
        }
        table
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// `*u = CNOT SWAP` on the logical Z values `(a, b) -> (b, a + b)`.
pub const STAR_U: Mat2 = [0, 1, 1, 1];
/// `*u^2 = SWAP CNOT`: `(a, b) -> (a + b, a)`.
pub const STAR_U2: Mat2 = [1, 1, 1, 0];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::{mat2_mul, IDENTITY2};

    fn c4(base: u32) -> Block {
        Block::node(NodeCode::C4, (0..4).map(|i| Block::Qubit(base + i)).collect())
    }

    #[test]
    fn c4_supports_match_code() {
        let b = c4(10);
        assert_eq!(b.logical_support(Basis::X, 0), vec![10, 11]);
        assert_eq!(b.logical_support(Basis::Z, 1), vec![12, 13]);
        assert_eq!(b.k(), 2);
    }

    #[test]
    fn every_gl2_element_is_a_relabeling() {
        assert_eq!(c4_table().len(), 6);
        assert_eq!(c6_table().len(), 6);
        let b = Block::node(NodeCode::C6, vec![c4(0), c4(4), c4(8)]);
        for v in gl2() {
            let r = b.relabel(v).unwrap();
            let mut q = r.qubits();
            q.sort_unstable();
            assert_eq!(q, (0..12).collect::<Vec<_>>());
        }
        assert_eq!(b.relabel(IDENTITY2).unwrap().relabel(STAR_U).unwrap().level(), 2);
    }

    #[test]
    fn star_u_powers() {
        assert_eq!(mat2_mul(STAR_U, STAR_U), STAR_U2);
        assert_eq!(mat2_mul(STAR_U, STAR_U2), IDENTITY2);
    }

    #[test]
    fn c6_level2_supports_have_even_overlap_with_stabilizers() {
        let b = Block::node(NodeCode::C6, vec![c4(0), c4(4), c4(8)]);
        for i in 0..2 {
            let x = b.logical_support(Basis::X, i);
            let z = b.logical_support(Basis::Z, i);
            let other = b.logical_support(Basis::Z, 1 - i);
            assert_eq!(x.iter().filter(|q| z.contains(q)).count() % 2, 1);
            assert_eq!(x.iter().filter(|q| other.contains(q)).count() % 2, 0);
        }
    }
}
