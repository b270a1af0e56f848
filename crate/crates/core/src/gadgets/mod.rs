//! Gadget compiler: verified encoded preparations, Bell pairs, Knill error
//! correction and the logical CNOT benchmark, emitted as flat circuits.
//!
//! A level-`l` CNOT gadget on two blocks is the transversal CNOT of their
//! children, each child pair followed by level-`l-1` error correction on both
//! outputs; at level 1 it is the physical transversal CNOT. Error correction
//! is Knill teleportation through a verified Bell pair.

mod block;
mod builder;
pub mod ft;

use serde::{Deserialize, Serialize};

pub use block::{Block, NodeCode, STAR_U, STAR_U2};
use builder::Builder;

use crate::circuit::{Basis, Circuit, Gate1, ResolveMode, Signal};
use crate::codes::{hamming_checks, LatinRectangle};
use crate::decoders::{hamming_tables, DecoderKind};
use crate::error::{Error, Result};
use crate::gf2::{mat2_inverse, mat2_mul, mat2_transpose, solve, BitVec, Echelon, Mat2, IDENTITY2};
use crate::pauli::Letter;

/// Concatenation family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// C4 at level 1, C6 above.
    C4C6,
    Steane,
    /// C4 at level 1, Steane above.
    C4Steane,
    /// A single level of the Hamming code `Q_r`.
    Hamming(u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeSpec {
    pub family: Family,
    pub level: u8,
}

impl CodeSpec {
    pub fn new(family: Family, level: u8) -> Result<Self> {
        if level == 0 {
            return Err(Error::Contract("code level must be at least 1".into()));
        }
        if let Family::Hamming(r) = family {
            if !(3..=8).contains(&r) {
                return Err(Error::Unsupported(format!("Hamming code with r = {r}")));
            }
            if level != 1 {
                return Err(Error::Unsupported("Hamming codes are simulated at level 1 only".into()));
            }
        }
        Ok(CodeSpec { family, level })
    }

    /// Parses `c4`, `c6`, `c4c6:L`, `c6:L`, `steane[:L]`, `c4steane[:L]`
    /// (default level 2) or `qR`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (name, level) = match s.split_once(':') {
            Some((n, l)) => {
                let l: u8 = l.parse().map_err(|_| Error::Parse(format!("bad level in {s:?}")))?;
                (n.to_string(), Some(l))
            }
            None => (s.clone(), None),
        };
        match name.as_str() {
            "c4" => CodeSpec::new(Family::C4C6, level.unwrap_or(1)),
            "c6" | "c4c6" => CodeSpec::new(Family::C4C6, level.unwrap_or(2)),
            "steane" => CodeSpec::new(Family::Steane, level.unwrap_or(1)),
            "c4steane" | "c4/steane" => CodeSpec::new(Family::C4Steane, level.unwrap_or(2)),
            q if q.starts_with('q') => {
                let r: u8 = q[1..].parse().map_err(|_| Error::Parse(format!("unknown code {s:?}")))?;
                CodeSpec::new(Family::Hamming(r), level.unwrap_or(1))
            }
            _ => Err(Error::Parse(format!("unknown code {s:?}"))),
        }
    }

    /// Canonical name accepted by [`CodeSpec::parse`].
    pub fn name(&self) -> String {
        match self.family {
            Family::C4C6 if self.level == 1 => "c4".into(),
            Family::C4C6 => format!("c6:{}", self.level),
            Family::Steane => format!("steane:{}", self.level),
            Family::C4Steane => format!("c4steane:{}", self.level),
            Family::Hamming(r) => format!("q{r}"),
        }
    }

    pub fn node_code(&self, level: usize) -> NodeCode {
        match self.family {
            Family::C4C6 if level == 1 => NodeCode::C4,
            Family::C4C6 => NodeCode::C6,
            Family::Steane => NodeCode::Steane,
            Family::C4Steane if level == 1 => NodeCode::C4,
            Family::C4Steane => NodeCode::Steane,
            Family::Hamming(r) => NodeCode::Hamming(r),
        }
    }

    /// Logical qubits per block.
    pub fn k(&self) -> usize {
        match self.family {
            Family::C4C6 | Family::C4Steane => 2,
            Family::Steane => 1,
            Family::Hamming(r) => hamming_tables(r).k,
        }
    }
}

impl std::fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SteanePrep {
    /// One encoder and a single ancilla checking a logical-Z representative.
    Goto,
    /// Two encoders, one verifying the other.
    Conventional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdlePolicy {
    /// No idle locations.
    None,
    /// Every round of the benchmark is scheduled as soon as possible and each
    /// waiting qubit gets one idle location per time step.
    Lockstep,
    /// Each round is scheduled as late as possible and idle locations fill
    /// only the gaps between consecutive operations of a qubit.
    Gaps,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompileOptions {
    pub steane_prep: SteanePrep,
    pub idle: IdlePolicy,
    /// Error detection on the halves of C4/C6 Bell pairs.
    pub bell_ed: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { steane_prep: SteanePrep::Goto, idle: IdlePolicy::Gaps, bell_ed: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `rounds` noisy CNOT + EC rounds.
    Full,
    /// One noisy round followed by a noiseless CNOT.
    Simplified,
}

/// A compiled gadget with its named output blocks.
#[derive(Clone, Debug)]
pub struct GadgetCircuit {
    pub circuit: Circuit,
    pub blocks: Vec<(String, Block)>,
    /// Noiseless identity locations on the input block, for fault injection.
    pub input_sites: Vec<u32>,
}

#[derive(Clone, Copy)]
enum Mode {
    Correction,
    Detection(u32),
}

struct Compiler {
    b: Builder,
    code: CodeSpec,
    opts: CompileOptions,
}

fn basis_name(b: Basis) -> &'static str {
    match b {
        Basis::Z => "zero",
        Basis::X => "plus",
    }
}

/// Logical read-out offsets of the ancillas of the level-`l >= 2` C6
/// preparation: row `k` lists, for each data child `n`, the map from the
/// child's values to the ancilla's pair.
const C6_W: [[Mat2; 3]; 3] = {
    const O: Mat2 = [0, 0, 0, 0];
    const S: Mat2 = [0, 1, 1, 0];
    const L: Mat2 = [1, 0, 1, 1];
    const U: Mat2 = [1, 1, 0, 1];
    [[O, S, L], [S, O, U], [S, S, S]]
};

/// Data slots `(child, logical)` and the readout bits `(ancilla, logical)`
/// that control each correction.
fn c6_corrections() -> Vec<((usize, usize), Vec<(usize, usize)>)> {
    let row = |k: usize, a: usize| {
        let mut v = BitVec::zeros(6);
        for n in 0..3 {
            for j in 0..2 {
                v.set(2 * n + j, C6_W[k][n][2 * a + j] == 1);
            }
        }
        v
    };
    let mut ech = Echelon::new();
    let mut pivots: Vec<((usize, usize), BitVec)> = Vec::new();
    for k in 0..3 {
        for a in 0..2 {
            let r = row(k, a);
            if ech.insert(&r) {
                pivots.push(((k, a), r));
            }
        }
    }
    let rows: Vec<BitVec> = pivots.iter().map(|p| p.1.clone()).collect();
    let sols: Vec<BitVec> = (0..rows.len())
        .map(|p| {
            let e: Vec<bool> = (0..rows.len()).map(|i| i == p).collect();
            solve(&rows, &e, 6).expect("pivot rows are independent")
        })
        .collect();
    let mut out = Vec::new();
    for n in 0..3 {
        for j in 0..2 {
            let ctrl: Vec<(usize, usize)> =
                (0..rows.len()).filter(|&p| sols[p].get(2 * n + j)).map(|p| pivots[p].0).collect();
            if !ctrl.is_empty() {
                out.push(((n, j), ctrl));
            }
        }
    }
    out
}

impl Compiler {
    fn new(code: CodeSpec, opts: CompileOptions) -> Self {
        Compiler { b: Builder::new(), code, opts }
    }

    fn begin(&mut self, name: &str) {
        let name = if self.b.noisy { name.to_string() } else { format!("{name}!") };
        self.b.begin_segment(&name);
    }

    fn prep(&mut self, level: usize, basis: Basis) -> Result<Block> {
        if level == 0 {
            return Ok(Block::Qubit(self.b.prep(basis)));
        }
        match self.code.node_code(level) {
            NodeCode::C4 => self.prep_c4(basis),
            NodeCode::C6 => self.prep_c6(level, basis),
            NodeCode::Steane => {
                if self.code.family == Family::Steane && self.opts.steane_prep == SteanePrep::Goto {
                    self.prep_goto(level, basis)
                } else {
                    self.prep_copy(level, basis)
                }
            }
            NodeCode::Hamming(_) => self.prep_copy(level, basis),
        }
    }

    /// Physical transversal CNOT.
    fn transversal(&mut self, a: &Block, t: &Block) {
        for (x, y) in a.qubits().into_iter().zip(t.qubits()) {
            self.b.cnot(x, y);
        }
    }

    /// Level-`l` CNOT gadget without trailing level-`l` error correction.
    fn cnot_gadget(&mut self, a: Block, t: Block) -> Result<(Block, Block)> {
        if a.level() <= 1 {
            self.transversal(&a, &t);
            return Ok((a, t));
        }
        let code = a.code().unwrap();
        let mut ca = Vec::new();
        let mut ct = Vec::new();
        for (x, y) in a.children().iter().zip(t.children()) {
            let (x, y) = self.cnot_ec(x.clone(), y.clone())?;
            ca.push(x);
            ct.push(y);
        }
        Ok((Block::node(code, ca), Block::node(code, ct)))
    }

    /// CNOT gadget followed by error correction on both outputs.
    fn cnot_ec(&mut self, a: Block, t: Block) -> Result<(Block, Block)> {
        let (a, t) = self.cnot_gadget(a, t)?;
        if a.level() == 0 {
            return Ok((a, t));
        }
        let a = self.ec(a, Mode::Correction, false)?;
        let t = self.ec(t, Mode::Correction, false)?;
        Ok((a, t))
    }

    fn maybe_ec(&mut self, b: Block) -> Result<Block> {
        if b.level() == 0 {
            Ok(b)
        } else {
            self.ec(b, Mode::Correction, false)
        }
    }

    /// Knill error correction (or detection) by teleportation.
    fn ec(&mut self, data: Block, mode: Mode, bare: bool) -> Result<Block> {
        let level = data.level();
        let (a, out) = self.bell(level, !bare)?;
        self.transversal(&data, &a);
        let mx = self.measure(&data, Basis::X);
        let mz = self.measure(&a, Basis::Z);
        for s in mx.iter().chain(&mz) {
            if let Signal::Reg(r) = *s {
                let m = match mode {
                    Mode::Correction => ResolveMode::Randomize,
                    Mode::Detection(flag) => ResolveMode::Flag(flag),
                };
                self.b.resolve(r, m);
            }
        }
        for k in 0..out.k() {
            self.b.cond_pauli(Letter::X, out.logical_support(Basis::X, k), vec![mz[k]]);
            self.b.cond_pauli(Letter::Z, out.logical_support(Basis::Z, k), vec![mx[k]]);
        }
        Ok(out)
    }

    /// Bell pair `(A, B)`: `A` is the `|0>`-prepared half that becomes the CNOT
    /// target. With `full`, C4/C6 halves pass error detection and the pair is
    /// replaced by an independently prepared copy when detection fires.
    fn bell(&mut self, level: usize, full: bool) -> Result<(Block, Block)> {
        let a = self.prep(level, Basis::Z)?;
        let b = self.prep(level, Basis::X)?;
        let (b, a) = self.cnot_gadget(b, a)?;
        let detects = matches!(self.code.node_code(level), NodeCode::C4 | NodeCode::C6);
        if !(full && detects && self.opts.bell_ed) {
            return Ok((a, b));
        }
        let flag = self.b.flag();
        let a = self.ec(a, Mode::Detection(flag), true)?;
        let b = self.ec(b, Mode::Detection(flag), true)?;
        let a2 = self.prep(level, Basis::Z)?;
        let b2 = self.prep(level, Basis::X)?;
        let (b2, a2) = self.cnot_gadget(b2, a2)?;
        let a2 = self.ec(a2, Mode::Correction, true)?;
        let b2 = self.ec(b2, Mode::Correction, true)?;
        let mut first = a.qubits();
        first.extend(b.qubits());
        let mut second = a2.qubits();
        second.extend(b2.qubits());
        self.b.cond_swap(first, second, Signal::Reg(flag));
        Ok((a, b))
    }

    /// Measures every qubit and decodes the logical values.
    fn measure(&mut self, block: &Block, basis: Basis) -> Vec<Signal> {
        match block {
            Block::Qubit(q) => vec![self.b.measure(*q, basis)],
            Block::Node { code, children } => {
                let kids: Vec<Vec<Signal>> = children.iter().map(|c| self.measure(c, basis)).collect();
                self.combine(*code, children, kids, basis)
            }
        }
    }

    fn combine(&mut self, code: NodeCode, children: &[Block], kids: Vec<Vec<Signal>>, basis: Basis) -> Vec<Signal> {
        match code {
            NodeCode::C4 => self.b.decode(DecoderKind::C4 { basis }, kids.concat()),
            NodeCode::C6 => self.b.decode(DecoderKind::C6 { basis }, kids.concat()),
            NodeCode::Steane => {
                let kind =
                    if children[0].code() == Some(NodeCode::C4) { DecoderKind::C4SteaneL2 } else { DecoderKind::Steane };
                (0..kids[0].len()).map(|j| self.b.decode(kind, kids.iter().map(|v| v[j]).collect())[0]).collect()
            }
            NodeCode::Hamming(r) => {
                let kc = kids[0].len();
                let mut out = vec![Signal::Bit(0); hamming_tables(r).k * kc];
                for j in 0..kc {
                    let vals = self.b.decode(DecoderKind::Hamming { r, basis }, kids.iter().map(|v| v[j]).collect());
                    for (k, v) in vals.into_iter().enumerate() {
                        out[k * kc + j] = v;
                    }
                }
                out
            }
        }
    }

    /// `|00>` (Z) or `|++>` (X) of C4 with a four-qubit parity ancilla.
    fn prep_c4(&mut self, basis: Basis) -> Result<Block> {
        self.begin(&format!("prep_{}_l1", basis_name(basis)));
        let data: Vec<u32> = (0..4).map(|_| self.b.prep(basis.dual())).collect();
        let anc: Vec<u32> = (0..4).map(|_| self.b.prep(basis)).collect();
        for shift in 0..2 {
            for j in 0..4 {
                let d = data[(j + shift) % 4];
                match basis {
                    Basis::Z => self.b.cnot(d, anc[j]),
                    Basis::X => self.b.cnot(anc[j], d),
                }
            }
        }
        let i: Vec<Signal> = anc.iter().map(|&a| self.b.measure(a, basis)).collect();
        self.b.check(i.clone());
        let letter = if basis == Basis::Z { Letter::X } else { Letter::Z };
        for t in 1..4 {
            self.b.cond_pauli(letter, vec![data[t]], i[..t].to_vec());
        }
        self.b.end_segment();
        Ok(Block::node(NodeCode::C4, data.into_iter().map(Block::Qubit).collect()))
    }

    /// Level-`l >= 2` C6 preparation from three data blocks and three ancilla
    /// blocks, each ancilla collecting two parities through relabeled CNOTs.
    fn prep_c6(&mut self, level: usize, basis: Basis) -> Result<Block> {
        self.begin(&format!("prep_{}_l{level}", basis_name(basis)));
        let mut data = Vec::new();
        for _ in 0..3 {
            data.push(self.prep(level - 1, basis.dual())?);
        }
        let mut anc = Vec::new();
        for _ in 0..3 {
            anc.push(self.prep(level - 1, basis)?);
        }
        let flag = self.b.flag();
        let inv = |m: Mat2| mat2_inverse(m).expect("nonsingular");
        let frame = |m: Mat2| if basis == Basis::Z { m } else { mat2_transpose(inv(m)) };
        let mut readout = Vec::new();
        for (k, mut a) in anc.into_iter().enumerate() {
            let mut g = IDENTITY2;
            for n in 0..3 {
                let w = C6_W[k][n];
                if w == [0, 0, 0, 0] {
                    continue;
                }
                a = a.relabel(frame(mat2_mul(inv(w), g)))?;
                let d = std::mem::replace(&mut data[n], Block::Qubit(0));
                let (d, a2) = match basis {
                    Basis::Z => self.cnot_gadget(d, a)?,
                    Basis::X => {
                        let (a2, d) = self.cnot_gadget(a, d)?;
                        (d, a2)
                    }
                };
                data[n] = self.ec(d, Mode::Detection(flag), true)?;
                a = self.ec(a2, Mode::Detection(flag), true)?;
                g = w;
            }
            a = a.relabel(frame(g))?;
            let m = self.measure(&a, basis);
            for s in &m {
                if let Signal::Reg(r) = *s {
                    self.b.resolve(r, ResolveMode::Flag(flag));
                }
            }
            readout.push(m);
        }
        for a in 0..2 {
            self.b.check((0..3).map(|k| readout[k][a]).collect());
        }
        self.b.check(vec![Signal::Reg(flag)]);
        let letter = if basis == Basis::Z { Letter::X } else { Letter::Z };
        for ((n, j), ctrl) in c6_corrections() {
            let support = data[n].logical_support(basis.dual(), j);
            self.b.cond_pauli(letter, support, ctrl.iter().map(|&(k, a)| readout[k][a]).collect());
        }
        self.b.end_segment();
        Ok(Block::node(NodeCode::C6, data))
    }

    /// Unverified Hamming encoder over level-`l-1` children.
    fn encoder(&mut self, level: usize, basis: Basis) -> Result<Block> {
        let (node, r) = match self.code.node_code(level) {
            NodeCode::Steane => (NodeCode::Steane, 3),
            NodeCode::Hamming(r) => (NodeCode::Hamming(r), r),
            other => return Err(Error::Contract(format!("no encoder for {other:?}"))),
        };
        let rect = LatinRectangle::bundled(r)?;
        let mut kids = Vec::new();
        for q in 1..=rect.n {
            let control = q.is_power_of_two();
            let b = if control == (basis == Basis::Z) { Basis::X } else { Basis::Z };
            kids.push(Some(self.prep(level - 1, b)?));
        }
        for (_, c, t) in rect.schedule() {
            let (x, y) = if basis == Basis::Z { (c - 1, t - 1) } else { (t - 1, c - 1) };
            let (bx, by) = (kids[x].take().unwrap(), kids[y].take().unwrap());
            let (bx, by) = self.cnot_ec(bx, by)?;
            kids[x] = Some(bx);
            kids[y] = Some(by);
        }
        Ok(Block::node(node, kids.into_iter().map(Option::unwrap).collect()))
    }

    /// Steane preparation verified by one ancilla block that reads the
    /// weight-3 logical representative on children 2, 5 and 7.
    fn prep_goto(&mut self, level: usize, basis: Basis) -> Result<Block> {
        self.begin(&format!("prep_{}_l{level}", basis_name(basis)));
        let enc = self.encoder(level, basis)?;
        let Block::Node { code, mut children } = enc else { unreachable!() };
        let mut anc = self.prep(level - 1, basis)?;
        for n in [1, 4, 6] {
            let d = std::mem::replace(&mut children[n], Block::Qubit(0));
            let d = match basis {
                Basis::Z => {
                    let (d, a) = self.cnot_gadget(d, anc)?;
                    anc = a;
                    d
                }
                Basis::X => {
                    let (a, d) = self.cnot_gadget(anc, d)?;
                    anc = a;
                    d
                }
            };
            children[n] = self.maybe_ec(d)?;
        }
        let m = self.measure(&anc, basis);
        for s in m {
            self.b.check(vec![s]);
        }
        self.b.end_segment();
        Ok(Block::node(code, children))
    }

    /// Encoder verified against a second encoder copy.
    fn prep_copy(&mut self, level: usize, basis: Basis) -> Result<Block> {
        self.begin(&format!("prep_{}_l{level}", basis_name(basis)));
        let e1 = self.encoder(level, basis)?;
        let e2 = self.encoder(level, basis)?;
        let Block::Node { code, children: c1 } = e1 else { unreachable!() };
        let Block::Node { children: c2, .. } = e2 else { unreachable!() };
        let mut keep = Vec::new();
        let mut test = Vec::new();
        for (x, y) in c1.into_iter().zip(c2) {
            let (x, y) = match basis {
                Basis::Z => self.cnot_gadget(x, y)?,
                Basis::X => {
                    let (y, x) = self.cnot_gadget(y, x)?;
                    (x, y)
                }
            };
            keep.push(self.maybe_ec(x)?);
            test.push(y);
        }
        let vals: Vec<Vec<Signal>> = test.iter().map(|c| self.measure(c, basis)).collect();
        let child_erases = level >= 2 && matches!(self.code.node_code(level - 1), NodeCode::C4 | NodeCode::C6);
        if child_erases {
            let flag = self.b.flag();
            for s in vals.iter().flatten() {
                if let Signal::Reg(r) = *s {
                    self.b.resolve(r, ResolveMode::Flag(flag));
                }
            }
            self.b.check(vec![Signal::Reg(flag)]);
        }
        let parities: Vec<Vec<usize>> = match code {
            NodeCode::Steane => vec![vec![0, 2, 4, 6], vec![1, 2, 5, 6], vec![0, 1, 2]],
            NodeCode::Hamming(r) => {
                let mut p: Vec<Vec<usize>> =
                    hamming_checks(r).into_iter().map(|row| row.into_iter().map(|j| j - 1).collect()).collect();
                p.extend(hamming_tables(r).support(basis.dual()).iter().cloned());
                p
            }
            _ => unreachable!(),
        };
        for j in 0..vals[0].len() {
            for par in &parities {
                self.b.check(par.iter().map(|&n| vals[n][j]).collect());
            }
        }
        self.b.end_segment();
        Ok(Block::node(code, keep))
    }

    fn finish(self, blocks: Vec<(&str, Block)>, outputs: Vec<Vec<Signal>>, input_sites: Vec<u32>) -> GadgetCircuit {
        let mut circuit = self.b.finish();
        circuit.outputs = outputs;
        circuit.blocks = blocks.iter().map(|(n, b)| (n.to_string(), b.qubits())).collect();
        GadgetCircuit {
            circuit,
            blocks: blocks.into_iter().map(|(n, b)| (n.to_string(), b)).collect(),
            input_sites,
        }
    }
}

/// Verified preparation of the top-level block in `|0...0>` or `|+...+>`.
pub fn build_prep(code: CodeSpec, state: Basis, opts: CompileOptions) -> Result<GadgetCircuit> {
    let mut c = Compiler::new(code, opts);
    let b = c.prep(code.level as usize, state)?;
    Ok(c.finish(vec![("out", b)], Vec::new(), Vec::new()))
}

/// Bell pair used by error correction; blocks `a` (Z side) and `b` (X side).
pub fn build_bell_prep(code: CodeSpec, opts: CompileOptions) -> Result<GadgetCircuit> {
    let mut c = Compiler::new(code, opts);
    let (a, b) = c.bell(code.level as usize, true)?;
    Ok(c.finish(vec![("a", a), ("b", b)], Vec::new(), Vec::new()))
}

/// Noiseless input in `|0...0>` or `|+...+>`, one noiseless identity per input
/// qubit (the injection sites), then one noisy error correction.
pub fn build_knill_ec(code: CodeSpec, input: Basis, opts: CompileOptions) -> Result<GadgetCircuit> {
    let mut c = Compiler::new(code, opts);
    c.b.noisy = false;
    let data = c.prep(code.level as usize, input)?;
    let sites: Vec<u32> = data.qubits().into_iter().map(|q| c.b.gate1(q, Gate1::I)).collect();
    c.b.noisy = true;
    let out = c.ec(data, Mode::Correction, false)?;
    Ok(c.finish(vec![("out", out)], Vec::new(), sites))
}

/// Logical `*u` (or `*u^2`) on a C4/C6 block prepared noiselessly in
/// `|a b>`, read out in the Z basis. Outputs list the decoded values.
pub fn build_star_u(code: CodeSpec, squared: bool, input: [bool; 2]) -> Result<GadgetCircuit> {
    let mut c = Compiler::new(code, CompileOptions::default());
    c.b.noisy = false;
    let mut b = c.prep(code.level as usize, Basis::Z)?;
    for (k, &v) in input.iter().enumerate() {
        if v {
            for q in b.logical_support(Basis::X, k) {
                c.b.gate1(q, Gate1::X);
            }
        }
    }
    b = b.relabel(if squared { STAR_U2 } else { STAR_U })?;
    let m = c.measure(&b, Basis::Z);
    Ok(c.finish(Vec::new(), m.into_iter().map(|s| vec![s]).collect(), Vec::new()))
}

/// Transversal operations on noiselessly prepared blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transversal {
    /// CNOT between two `|0...0>` blocks; outputs the control's then the
    /// target's Z values.
    Cnot,
    /// Logical Pauli `letter` on logical `i`, then a read-out in the basis
    /// it flips.
    Pauli(Letter, usize),
    MeasureZ,
    MeasureX,
}

pub fn build_transversal(code: CodeSpec, op: Transversal) -> Result<GadgetCircuit> {
    let mut c = Compiler::new(code, CompileOptions::default());
    let level = code.level as usize;
    c.b.noisy = false;
    let outputs = match op {
        Transversal::Cnot => {
            let a = c.prep(level, Basis::Z)?;
            let t = c.prep(level, Basis::Z)?;
            c.b.noisy = true;
            c.transversal(&a, &t);
            let mut m = c.measure(&a, Basis::Z);
            m.extend(c.measure(&t, Basis::Z));
            m
        }
        Transversal::Pauli(letter, i) => {
            let (state, gate) = match letter {
                Letter::X => (Basis::Z, Gate1::X),
                Letter::Z => (Basis::X, Gate1::Z),
                other => return Err(Error::Unsupported(format!("transversal {other:?}"))),
            };
            let b = c.prep(level, state)?;
            c.b.noisy = true;
            let basis = if letter == Letter::X { Basis::X } else { Basis::Z };
            for q in b.logical_support(basis, i) {
                c.b.gate1(q, gate);
            }
            c.measure(&b, state)
        }
        Transversal::MeasureZ | Transversal::MeasureX => {
            let basis = if op == Transversal::MeasureZ { Basis::Z } else { Basis::X };
            let b = c.prep(level, basis)?;
            c.b.noisy = true;
            c.measure(&b, basis)
        }
    };
    Ok(c.finish(Vec::new(), outputs.into_iter().map(|s| vec![s]).collect(), Vec::new()))
}

/// Logical CNOT benchmark: two noiseless logical Bell pairs `(R_i, D_i)`, noisy
/// CNOT + EC rounds on `(D_1, D_2)`, a noiseless CNOT when the round count is
/// odd, then a noiseless Bell measurement of
/// each pair. Output `k` fails when any of the four decoded values of logical
/// `k` is nonzero or erased.
pub fn build_cnot_benchmark(
    code: CodeSpec,
    variant: Variant,
    rounds: u32,
    opts: CompileOptions,
) -> Result<GadgetCircuit> {
    if rounds == 0 {
        return Err(Error::Contract("benchmark needs at least one round".into()));
    }
    let mut c = Compiler::new(code, opts);
    let level = code.level as usize;
    c.b.noisy = false;
    let pair = |c: &mut Compiler| -> Result<(Block, Block)> {
        let r = c.prep(level, Basis::X)?;
        let d = c.prep(level, Basis::Z)?;
        c.transversal(&r, &d);
        Ok((r, d))
    };
    let (r1, mut d1) = pair(&mut c)?;
    let (r2, mut d2) = pair(&mut c)?;
    c.b.noisy = true;
    let noisy_rounds = match variant {
        Variant::Full => rounds,
        Variant::Simplified => 1,
    };
    for _ in 0..noisy_rounds {
        let start = c.b.c.ops.len();
        let (a, t) = c.cnot_ec(d1, d2)?;
        d1 = a;
        d2 = t;
        match opts.idle {
            IdlePolicy::None => {}
            IdlePolicy::Lockstep => c.b.insert_idles(start),
            IdlePolicy::Gaps => c.b.insert_gap_idles(start),
        }
    }
    c.b.noisy = false;
    if noisy_rounds % 2 == 1 {
        c.transversal(&d1, &d2);
    }
    c.transversal(&r1, &d1);
    c.transversal(&r2, &d2);
    let x1 = c.measure(&r1, Basis::X);
    let z1 = c.measure(&d1, Basis::Z);
    let x2 = c.measure(&r2, Basis::X);
    let z2 = c.measure(&d2, Basis::Z);
    let outputs = (0..x1.len()).map(|k| vec![x1[k], z1[k], x2[k], z2[k]]).collect();
    Ok(c.finish(Vec::new(), outputs, Vec::new()))
}

#[cfg(test)]
mod tests;
