//! Multi-qubit Pauli operators with exact phase tracking.
//!
//! An operator is stored as `i^phase * P_1 (x) ... (x) P_n` where each letter is
//! one of the Hermitian matrices I, X, Y, Z and `Y = i X Z`. Products therefore
//! pick up powers of `i`; the phase stays a multiple of 2 (a real sign) for any
//! Hermitian operator.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// Power of `i` picked up when multiplying single-qubit letters `a * b`,
/// returned modulo 4.
pub(crate) fn letter_product_phase(x1: bool, z1: bool, x2: bool, z2: bool) -> u8 {
    let g: i32 = match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 as i32 - x2 as i32,
        (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
        (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
    };
    g.rem_euclid(4) as u8
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        PauliOperator { n, x: vec![0; words(n)], z: vec![0; words(n)], phase: 0 }
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut p = Self::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            p.set(q, l);
        }
        p
    }

    /// Operator with `letter` on every qubit of `support`.
    pub fn on_support(n: usize, support: &[usize], letter: Letter) -> Self {
        let mut p = Self::identity(n);
        for &q in support {
            p.set(q, letter);
        }
        p
    }

    pub fn single(n: usize, q: usize, letter: Letter) -> Self {
        Self::on_support(n, &[q], letter)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x_bit(q), self.z_bit(q))
    }

    pub fn x_bit(&self, q: usize) -> bool {
        assert!(q < self.n, "qubit {q} out of range");
        self.x[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        assert!(q < self.n, "qubit {q} out of range");
        self.z[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn set(&mut self, q: usize, letter: Letter) {
        assert!(q < self.n, "qubit {q} out of range");
        let (xb, zb) = letter.bits();
        let m = 1u64 << (q % 64);
        let w = q / 64;
        self.x[w] = if xb { self.x[w] | m } else { self.x[w] & !m };
        self.z[w] = if zb { self.z[w] | m } else { self.z[w] & !m };
    }

    /// Exponent `k` of the global factor `i^k`.
    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    /// `+1` or `-1` for Hermitian operators, `None` when the phase is `±i`.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) % 4;
    }

    pub fn negated(mut self) -> Self {
        self.negate();
        self
    }

    pub fn with_phase(mut self, k: u8) -> Self {
        self.phase = k % 4;
        self
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.letter(q) != Letter::I).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        let mut acc = 0u32;
        for w in 0..self.x.len() {
            acc += ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones();
        }
        acc % 2 == 0
    }

    /// Same letters, ignoring the phase.
    pub fn equal_up_to_phase(&self, other: &PauliOperator) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    /// Restriction of the letters to a subset of qubits, in the given order.
    pub fn restrict(&self, qubits: &[usize]) -> PauliOperator {
        let mut p = PauliOperator::identity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            p.set(i, self.letter(q));
        }
        p
    }

    pub(crate) fn toggle_sign(&mut self, on: bool) {
        if on {
            self.negate();
        }
    }
}

impl Mul for &PauliOperator {
    type Output = PauliOperator;

    fn mul(self, rhs: &PauliOperator) -> PauliOperator {
        assert_eq!(self.n, rhs.n, "qubit count mismatch");
        let mut phase = self.phase as u32 + rhs.phase as u32;
        for q in 0..self.n {
            phase += letter_product_phase(self.x_bit(q), self.z_bit(q), rhs.x_bit(q), rhs.z_bit(q)) as u32;
        }
        PauliOperator {
            n: self.n,
            x: self.x.iter().zip(&rhs.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&rhs.z).map(|(a, b)| a ^ b).collect(),
            phase: (phase % 4) as u8,
        }
    }
}

impl Mul for PauliOperator {
    type Output = PauliOperator;

    fn mul(self, rhs: PauliOperator) -> PauliOperator {
        &self * &rhs
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}")?;
        for q in 0..self.n {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Parses strings such as `"XIZ"`, `"-YY"` or `"+iXZ"`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let (phase, body) = if let Some(b) = s.strip_prefix("+i") {
            (1, b)
        } else if let Some(b) = s.strip_prefix("-i") {
            (3, b)
        } else if let Some(b) = s.strip_prefix('-') {
            (2, b)
        } else {
            (0, s.strip_prefix('+').unwrap_or(s))
        };
        let letters = body
            .chars()
            .map(|c| match c {
                'I' | '_' => Ok(Letter::I),
                'X' => Ok(Letter::X),
                'Y' => Ok(Letter::Y),
                'Z' => Ok(Letter::Z),
                other => Err(Error::Parse(format!("bad Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PauliOperator::from_letters(&letters).with_phase(phase))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn xz_is_minus_i_y() {
        assert_eq!(&p("X") * &p("Z"), p("-iY"));
        assert_eq!(&p("Z") * &p("X"), p("+iY"));
        assert_eq!(&p("Y") * &p("Y"), p("I"));
    }

    #[test]
    fn squares_are_identity() {
        for s in ["X", "Y", "Z", "-XY", "YZX", "+iXX"] {
            let a = p(s);
            let sq = &a * &a;
            assert!(sq.is_identity());
            assert!(sq.sign().is_some(), "{s}");
        }
    }

    #[test]
    fn weight_and_support() {
        let a = p("IXIYZ");
        assert_eq!(a.weight(), 3);
        assert_eq!(a.support(), vec![1, 3, 4]);
        assert_eq!(PauliOperator::identity(9).weight(), 0);
    }

    #[test]
    fn commutation() {
        assert!(p("XX").commutes_with(&p("ZZ")));
        assert!(!p("XI").commutes_with(&p("ZI")));
        assert!(p("XXXX").commutes_with(&p("ZZII")));
    }

    #[test]
    fn display_round_trip() {
        for s in ["+XYZI", "-ZZ", "+iX", "-iYI"] {
            assert_eq!(p(s).to_string(), s);
        }
    }

    #[test]
    fn wide_operators_span_words() {
        let mut a = PauliOperator::identity(130);
        a.set(129, Letter::Y);
        a.set(3, Letter::X);
        assert_eq!(a.support(), vec![3, 129]);
        assert!(!a.commutes_with(&PauliOperator::single(130, 129, Letter::X)));
    }
}
