//! CSS codes, logical operator derivation, Latin-rectangle encoders and the
//! register index maps of concatenated Hamming codes.

use serde::{Deserialize, Serialize};

use crate::circuit::{Basis, Circuit, Location, LocationKind, Op};
use crate::error::{Error, Result};
use crate::gf2::{self, BitVec, Echelon};
use crate::pauli::{Letter, PauliOperator};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssCode {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub x_stabilizers: Vec<PauliOperator>,
    pub z_stabilizers: Vec<PauliOperator>,
    pub logical_x: Vec<PauliOperator>,
    pub logical_z: Vec<PauliOperator>,
}

fn ops(n: usize, supports: &[&[usize]], letter: Letter) -> Vec<PauliOperator> {
    supports
        .iter()
        .map(|s| PauliOperator::on_support(n, &s.iter().map(|q| q - 1).collect::<Vec<_>>(), letter))
        .collect()
}

fn bits_of(p: &PauliOperator, letter: Letter) -> BitVec {
    let n = p.n_qubits();
    let mut v = BitVec::zeros(n);
    for q in 0..n {
        let on = match letter {
            Letter::X => p.x_bit(q),
            _ => p.z_bit(q),
        };
        v.set(q, on);
    }
    v
}

impl CssCode {
    pub fn stabilizers(&self, basis: Basis) -> &[PauliOperator] {
        match basis {
            Basis::X => &self.x_stabilizers,
            Basis::Z => &self.z_stabilizers,
        }
    }

    pub fn logicals(&self, basis: Basis) -> &[PauliOperator] {
        match basis {
            Basis::X => &self.logical_x,
            Basis::Z => &self.logical_z,
        }
    }

    /// 0-based supports of the logical operators of one type.
    pub fn logical_supports(&self, basis: Basis) -> Vec<Vec<usize>> {
        self.logicals(basis).iter().map(|p| p.support()).collect()
    }

    pub fn stabilizer_supports(&self, basis: Basis) -> Vec<Vec<usize>> {
        self.stabilizers(basis).iter().map(|p| p.support()).collect()
    }

    /// Verifies commutation of all stabilizers and the canonical
    /// (anti)commutation pattern of the logical pairs.
    pub fn check_invariants(&self) -> Result<()> {
        let stabs: Vec<&PauliOperator> = self.x_stabilizers.iter().chain(&self.z_stabilizers).collect();
        for a in &stabs {
            for b in &stabs {
                if !a.commutes_with(b) {
                    return Err(Error::Contract(format!("{}: stabilizers {a} and {b} anticommute", self.name)));
                }
            }
        }
        if self.logical_x.len() != self.k || self.logical_z.len() != self.k {
            return Err(Error::Contract(format!("{}: expected {} logical pairs", self.name, self.k)));
        }
        for (i, lx) in self.logical_x.iter().enumerate() {
            for (j, lz) in self.logical_z.iter().enumerate() {
                if lx.commutes_with(lz) == (i == j) {
                    return Err(Error::Contract(format!("{}: bad pairing X{i} Z{j}", self.name)));
                }
            }
            for s in &stabs {
                if !lx.commutes_with(s) {
                    return Err(Error::Contract(format!("{}: logical X{i} anticommutes with {s}", self.name)));
                }
            }
        }
        for (i, lz) in self.logical_z.iter().enumerate() {
            for s in &stabs {
                if !lz.commutes_with(s) {
                    return Err(Error::Contract(format!("{}: logical Z{i} anticommutes with {s}", self.name)));
                }
            }
        }
        Ok(())
    }

    /// Whether `p` (of a single type) lies in the span of `stabilizers(basis)`.
    pub fn is_stabilizer(&self, p: &PauliOperator, basis: Basis) -> bool {
        let letter = if basis == Basis::X { Letter::X } else { Letter::Z };
        let mut e = Echelon::new();
        for s in self.stabilizers(basis) {
            e.insert(&bits_of(s, letter));
        }
        e.contains(&bits_of(p, letter))
    }
}

/// Logical representatives of a CSS code from its stabilizers: X logicals span
/// `ker(H_Z) / rowspace(H_X)`, Z logicals likewise, then the Z set is
/// recombined so that `X_i` and `Z_j` anticommute exactly when `i == j`.
pub fn derive_logical_operators(
    x_stabilizers: &[PauliOperator],
    z_stabilizers: &[PauliOperator],
) -> Result<(Vec<PauliOperator>, Vec<PauliOperator>)> {
    let n = x_stabilizers.first().or(z_stabilizers.first()).map(|p| p.n_qubits()).unwrap_or(0);
    for a in x_stabilizers {
        for b in z_stabilizers {
            if !a.commutes_with(b) {
                return Err(Error::Contract(format!("stabilizers {a} and {b} anticommute")));
            }
        }
    }
    let hx: Vec<BitVec> = x_stabilizers.iter().map(|p| bits_of(p, Letter::X)).collect();
    let hz: Vec<BitVec> = z_stabilizers.iter().map(|p| bits_of(p, Letter::Z)).collect();
    let quotient = |kernel_of: &[BitVec], modulo: &[BitVec]| -> Vec<BitVec> {
        let mut e = Echelon::new();
        for r in modulo {
            e.insert(r);
        }
        gf2::nullspace(kernel_of, n).into_iter().filter(|v| e.insert(v)).collect()
    };
    let lx = quotient(&hz, &hx);
    let lz = quotient(&hx, &hz);
    if lx.len() != lz.len() {
        return Err(Error::Contract("inconsistent stabilizer set".into()));
    }
    let k = lx.len();
    let gram: Vec<BitVec> = (0..k)
        .map(|i| BitVec::from_support(k, &(0..k).filter(|&j| lx[i].dot(&lz[j])).collect::<Vec<_>>()))
        .collect();
    let inv = gf2::inverse(&gram).ok_or_else(|| Error::Contract("degenerate logical pairing".into()))?;
    // Z'_j = sum_l inv[l][j] Z_l gives <X_i, Z'_j> = (G inv)_{ij} = delta_ij.
    let lz: Vec<BitVec> = (0..k)
        .map(|j| {
            let mut acc = BitVec::zeros(n);
            for (l, row) in inv.iter().enumerate() {
                if row.get(j) {
                    acc.xor_assign(&lz[l]);
                }
            }
            acc
        })
        .collect();
    let to_op = |v: &BitVec, letter| PauliOperator::on_support(n, &v.support(), letter);
    Ok((lx.iter().map(|v| to_op(v, Letter::X)).collect(), lz.iter().map(|v| to_op(v, Letter::Z)).collect()))
}

/// [[4,2,2]] code with `X1 = X1X2, Z1 = Z1Z3, X2 = X2X4, Z2 = Z3Z4`.
pub fn c4_code() -> CssCode {
    CssCode {
        name: "C4".into(),
        n: 4,
        k: 2,
        d: 2,
        x_stabilizers: ops(4, &[&[1, 2, 3, 4]], Letter::X),
        z_stabilizers: ops(4, &[&[1, 2, 3, 4]], Letter::Z),
        logical_x: ops(4, &[&[1, 2], &[2, 4]], Letter::X),
        logical_z: ops(4, &[&[1, 3], &[3, 4]], Letter::Z),
    }
}

/// [[6,2,2]] code on three two-qubit registers. Slot `2(n-1)+j` is logical
/// qubit `j` of register `n`.
pub fn c6_code() -> CssCode {
    let stabs: [&[usize]; 2] = [&[1, 4, 5, 6], &[1, 2, 3, 6]];
    CssCode {
        name: "C6".into(),
        n: 6,
        k: 2,
        d: 2,
        x_stabilizers: ops(6, &stabs, Letter::X),
        z_stabilizers: ops(6, &stabs, Letter::Z),
        logical_x: ops(6, &[&[2, 3], &[1, 3, 4]], Letter::X),
        logical_z: ops(6, &[&[3, 4, 6], &[4, 5]], Letter::Z),
    }
}

/// Parity-check rows of the classical Hamming code: row `t` has a one at each
/// position `j` (1-based) whose binary expansion has bit `t` set.
pub fn hamming_checks(r: u8) -> Vec<Vec<usize>> {
    let n = (1usize << r) - 1;
    (0..r).map(|t| (1..=n).filter(|j| j >> t & 1 == 1).collect()).collect()
}

fn minimal_representative(p: &BitVec, stabs: &[BitVec]) -> BitVec {
    let mut best = p.clone();
    for mask in 1u32..(1 << stabs.len()) {
        let mut c = p.clone();
        for (i, s) in stabs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                c.xor_assign(s);
            }
        }
        if (c.weight(), c.support()) < (best.weight(), best.support()) {
            best = c;
        }
    }
    best
}

pub fn hamming_code(r: u8) -> Result<CssCode> {
    if !(3..=8).contains(&r) {
        return Err(Error::Unsupported(format!("Hamming code with r = {r}")));
    }
    let n = (1usize << r) - 1;
    let k = n - 2 * r as usize;
    let checks = hamming_checks(r);
    let supports: Vec<&[usize]> = checks.iter().map(|c| c.as_slice()).collect();
    let xs = ops(n, &supports, Letter::X);
    let zs = ops(n, &supports, Letter::Z);
    let (mut lx, mut lz) = derive_logical_operators(&xs, &zs)?;
    if k == 1 {
        // Smallest-weight, lexicographically first representative: qubits 1, 2, 3.
        let stabs: Vec<BitVec> = xs.iter().map(|p| bits_of(p, Letter::X)).collect();
        let rep = minimal_representative(&bits_of(&lx[0], Letter::X), &stabs).support();
        lx = vec![PauliOperator::on_support(n, &rep, Letter::X)];
        lz = vec![PauliOperator::on_support(n, &rep, Letter::Z)];
    }
    Ok(CssCode {
        name: if r == 3 { "Steane".into() } else { format!("Q{r}") },
        n,
        k,
        d: 3,
        x_stabilizers: xs,
        z_stabilizers: zs,
        logical_x: lx,
        logical_z: lz,
    })
}

pub fn steane_code() -> CssCode {
    hamming_code(3).expect("r = 3 is valid")
}

/// `N_r = 2^r - 1`.
pub fn hamming_n(r: u8) -> u64 {
    (1u64 << r) - 1
}

/// `K_r = N_r - 2r`.
pub fn hamming_k(r: u8) -> u64 {
    hamming_n(r) - 2 * r as u64
}

/// CNOT schedule for Hamming-code encoders, stored as in the asset files: a
/// header line `r n` followed by `r` rows of `n` integers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatinRectangle {
    pub r: u8,
    pub n: usize,
    pub entries: Vec<Vec<u32>>,
}

const LATIN_ASSETS: [&str; 5] = [
    include_str!("../assets/latin/L3.txt"),
    include_str!("../assets/latin/L4.txt"),
    include_str!("../assets/latin/L5.txt"),
    include_str!("../assets/latin/L6.txt"),
    include_str!("../assets/latin/L7.txt"),
];

/// One scheduled CNOT: `(depth, control, target)` with 1-based qubit labels.
pub type ScheduledCnot = (u32, usize, usize);

impl LatinRectangle {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| Error::Parse("empty rectangle".into()))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header token {t:?}"))))
            .collect::<Result<_>>()?;
        let [r, n] = header[..] else { return Err(Error::Parse("header must be `r n`".into())) };
        let entries: Vec<Vec<u32>> = lines
            .map(|l| {
                l.split_whitespace()
                    .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad entry {t:?}"))))
                    .collect::<Result<Vec<u32>>>()
            })
            .collect::<Result<_>>()?;
        if entries.len() != r || entries.iter().any(|row| row.len() != n) || n != (1 << r) - 1 {
            return Err(Error::Parse(format!("rectangle shape does not match header {r} {n}")));
        }
        let rect = LatinRectangle { r: r as u8, n, entries };
        rect.validate()?;
        Ok(rect)
    }

    pub fn bundled(r: u8) -> Result<Self> {
        if !(3..=7).contains(&r) {
            return Err(Error::Unsupported(format!("no Latin rectangle for r = {r}")));
        }
        Self::parse(LATIN_ASSETS[(r - 3) as usize])
    }

    /// Within each row and each column the nonzero entries are distinct, and
    /// control positions are never targets.
    pub fn validate(&self) -> Result<()> {
        for (i, row) in self.entries.iter().enumerate() {
            let mut seen: Vec<u32> = row.iter().copied().filter(|&x| x != 0).collect();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Contract(format!("row {} reuses a depth", i + 1)));
            }
        }
        for j in 0..self.n {
            let mut col: Vec<u32> = self.entries.iter().map(|row| row[j]).filter(|&x| x != 0).collect();
            col.sort_unstable();
            if col.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Contract(format!("column {} reuses a depth", j + 1)));
            }
            if (j + 1).is_power_of_two() && !col.is_empty() {
                return Err(Error::Contract(format!("control qubit {} used as target", j + 1)));
            }
        }
        Ok(())
    }

    pub fn cnot_count(&self) -> usize {
        self.entries.iter().flatten().filter(|&&x| x != 0).count()
    }

    pub fn depth(&self) -> u32 {
        self.entries.iter().flatten().copied().max().unwrap_or(0)
    }

    /// The printed schedule, followed by any fan-out CNOT from control
    /// `2^(i-1)` to a position `j` with bit `i-1` set that the rectangle omits,
    /// placed at the first depth where both qubits are free. The completion
    /// makes the circuit encode the code's stabilizer state.
    pub fn schedule(&self) -> Vec<ScheduledCnot> {
        let mut gates: Vec<ScheduledCnot> = Vec::new();
        for (i, row) in self.entries.iter().enumerate() {
            for (j, &l) in row.iter().enumerate() {
                if l != 0 {
                    gates.push((l, 1 << i, j + 1));
                }
            }
        }
        let mut busy: std::collections::HashSet<(u32, usize)> =
            gates.iter().flat_map(|&(l, c, t)| [(l, c), (l, t)]).collect();
        for i in 0..self.r as usize {
            for j in 1..=self.n {
                if j >> i & 1 == 1 && !j.is_power_of_two() && self.entries[i][j - 1] == 0 {
                    let c = 1 << i;
                    let l = (1..).find(|&l| !busy.contains(&(l, c)) && !busy.contains(&(l, j))).unwrap();
                    busy.insert((l, c));
                    busy.insert((l, j));
                    gates.push((l, c, j));
                }
            }
        }
        gates.sort();
        gates
    }
}

/// Unverified Hamming-code encoder for `|0...0>` (or the dual circuit for
/// `|+...+>`), as a standalone circuit on qubits `0..N_r`.
pub fn latin_rectangle_circuit(r: u8, state: Basis) -> Result<Circuit> {
    let rect = LatinRectangle::bundled(r)?;
    let n = rect.n;
    let mut c = Circuit { n_qubits: n as u32, ..Circuit::default() };
    let push = |c: &mut Circuit, kind, targets: [u32; 2]| {
        c.ops.push(Op::Loc(c.locations.len() as u32));
        c.locations.push(Location { kind, targets, noisy: true, bit: 0 });
    };
    for q in 1..=n {
        let control_role = q.is_power_of_two();
        let kind = match (state, control_role) {
            (Basis::Z, true) | (Basis::X, false) => LocationKind::PrepPlus,
            _ => LocationKind::Prep0,
        };
        push(&mut c, kind, [(q - 1) as u32, 0]);
    }
    for (_, ctrl, tgt) in rect.schedule() {
        let (a, b) = match state {
            Basis::Z => (ctrl, tgt),
            Basis::X => (tgt, ctrl),
        };
        push(&mut c, LocationKind::Cnot, [(a - 1) as u32, (b - 1) as u32]);
    }
    Ok(c)
}

/// Index map of level-`l` logical qubits: `i = K^(l-1) (k-1) + j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterIndex {
    pub level: usize,
    pub k_prev: u64,
    pub k_code: u64,
}

impl RegisterIndex {
    pub fn flat(&self, k: u64, j: u64) -> u64 {
        debug_assert!((1..=self.k_code).contains(&k) && (1..=self.k_prev).contains(&j));
        self.k_prev * (k - 1) + j
    }

    pub fn split(&self, i: u64) -> (u64, u64) {
        ((i - 1) / self.k_prev + 1, (i - 1) % self.k_prev + 1)
    }

    pub fn k_level(&self) -> u64 {
        self.k_prev * self.k_code
    }
}

/// Register maps of a Hamming chain on top of an underlying code with `k0`
/// logical qubits per block.
pub fn chain_register_layout(k0: u64, hamming_sequence: &[u8]) -> Vec<RegisterIndex> {
    let mut k_prev = k0;
    hamming_sequence
        .iter()
        .enumerate()
        .map(|(l, &r)| {
            let idx = RegisterIndex { level: l + 1, k_prev, k_code: hamming_k(r) };
            k_prev = idx.k_level();
            idx
        })
        .collect()
}
