//! Stabilizer tableau with destabilizers.

use rand::Rng;

use crate::circuit::Gate1;
use crate::pauli::Letter;

#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    words: usize,
    // Rows 0..n are destabilizers, n..2n stabilizers, 2n is scratch.
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

impl Tableau {
    /// The all-|0> state on `n` qubits.
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let rows = 2 * n + 1;
        let mut t = Tableau { n, words, x: vec![0; rows * words], z: vec![0; rows * words], r: vec![false; rows] };
        for q in 0..n {
            t.set_x(q, q, true);
            t.set_z(n + q, q, true);
        }
        t
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn get_x(&self, row: usize, q: usize) -> bool {
        self.x[row * self.words + q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    fn get_z(&self, row: usize, q: usize) -> bool {
        self.z[row * self.words + q / 64] >> (q % 64) & 1 == 1
    }

    #[inline]
    fn set_x(&mut self, row: usize, q: usize, v: bool) {
        let i = row * self.words + q / 64;
        let m = 1u64 << (q % 64);
        if v {
            self.x[i] |= m
        } else {
            self.x[i] &= !m
        }
    }

    #[inline]
    fn set_z(&mut self, row: usize, q: usize, v: bool) {
        let i = row * self.words + q / 64;
        let m = 1u64 << (q % 64);
        if v {
            self.z[i] |= m
        } else {
            self.z[i] &= !m
        }
    }

    pub fn h(&mut self, q: usize) {
        for row in 0..2 * self.n {
            let (x, z) = (self.get_x(row, q), self.get_z(row, q));
            self.r[row] ^= x && z;
            self.set_x(row, q, z);
            self.set_z(row, q, x);
        }
    }

    pub fn s(&mut self, q: usize) {
        for row in 0..2 * self.n {
            let (x, z) = (self.get_x(row, q), self.get_z(row, q));
            self.r[row] ^= x && z;
            self.set_z(row, q, z ^ x);
        }
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        for row in 0..2 * self.n {
            let (xc, zc, xt, zt) = (self.get_x(row, c), self.get_z(row, c), self.get_x(row, t), self.get_z(row, t));
            self.r[row] ^= xc && zt && !(xt ^ zc);
            self.set_x(row, t, xt ^ xc);
            self.set_z(row, c, zc ^ zt);
        }
    }

    /// Applies a Pauli letter to the state (conjugating the generators).
    pub fn pauli(&mut self, q: usize, letter: Letter) {
        let (px, pz) = letter.bits();
        for row in 0..2 * self.n {
            // Sign flips when the generator anticommutes with the Pauli.
            let flip = (px && self.get_z(row, q)) ^ (pz && self.get_x(row, q));
            self.r[row] ^= flip;
        }
    }

    pub fn gate1(&mut self, q: usize, g: Gate1) {
        match g {
            Gate1::I => {}
            Gate1::X => self.pauli(q, Letter::X),
            Gate1::Y => self.pauli(q, Letter::Y),
            Gate1::Z => self.pauli(q, Letter::Z),
            Gate1::H => self.h(q),
            Gate1::S => self.s(q),
        }
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        for row in 0..2 * self.n {
            let (xa, za, xb, zb) = (self.get_x(row, a), self.get_z(row, a), self.get_x(row, b), self.get_z(row, b));
            self.set_x(row, a, xb);
            self.set_z(row, a, zb);
            self.set_x(row, b, xa);
            self.set_z(row, b, za);
        }
    }

    /// `row h <- row i * row h`, tracking the sign.
    fn rowsum(&mut self, h: usize, i: usize) {
        let w = self.words;
        let mut plus = 0i64;
        let mut minus = 0i64;
        for k in 0..w {
            let (x1, z1) = (self.x[i * w + k], self.z[i * w + k]);
            let (x2, z2) = (self.x[h * w + k], self.z[h * w + k]);
            let p = (x1 & !z1 & x2 & z2) | (x1 & z1 & !x2 & z2) | (!x1 & z1 & x2 & !z2);
            let m = (x1 & !z1 & !x2 & z2) | (x1 & z1 & x2 & !z2) | (!x1 & z1 & x2 & z2);
            plus += p.count_ones() as i64;
            minus += m.count_ones() as i64;
        }
        let total = 2 * self.r[h] as i64 + 2 * self.r[i] as i64 + plus - minus;
        self.r[h] = total.rem_euclid(4) == 2;
        for k in 0..w {
            self.x[h * w + k] ^= self.x[i * w + k];
            self.z[h * w + k] ^= self.z[i * w + k];
        }
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        let w = self.words;
        for k in 0..w {
            self.x[dst * w + k] = self.x[src * w + k];
            self.z[dst * w + k] = self.z[src * w + k];
        }
        self.r[dst] = self.r[src];
    }

    fn clear_row(&mut self, row: usize) {
        let w = self.words;
        for k in 0..w {
            self.x[row * w + k] = 0;
            self.z[row * w + k] = 0;
        }
        self.r[row] = false;
    }

    /// Whether measuring Z on `q` would give a random outcome.
    pub fn is_random_z(&self, q: usize) -> bool {
        (self.n..2 * self.n).any(|row| self.get_x(row, q))
    }

    /// Measures Z on `q`. Random outcomes are drawn by `choose`, which
    /// is called only when the outcome is not determined.
    pub fn measure_z_with(&mut self, q: usize, choose: impl FnOnce() -> bool) -> (bool, bool) {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&row| self.get_x(row, q)) {
            for row in 0..2 * n {
                if row != p && self.get_x(row, q) {
                    self.rowsum(row, p);
                }
            }
            self.copy_row(p - n, p);
            self.clear_row(p);
            self.set_z(p, q, true);
            let outcome = choose();
            self.r[p] = outcome;
            (outcome, true)
        } else {
            let scratch = 2 * n;
            self.clear_row(scratch);
            for row in 0..n {
                if self.get_x(row, q) {
                    self.rowsum(scratch, row + n);
                }
            }
            (self.r[scratch], false)
        }
    }

    pub fn measure_z<R: Rng>(&mut self, q: usize, rng: &mut R) -> bool {
        self.measure_z_with(q, || rng.gen()).0
    }

    pub fn measure_x_with(&mut self, q: usize, choose: impl FnOnce() -> bool) -> (bool, bool) {
        self.h(q);
        let out = self.measure_z_with(q, choose);
        self.h(q);
        out
    }

    /// Resets `q` to |0> (or |+> when `plus`), choosing outcome 0 whenever the
    /// intermediate measurement is random so that no correction is needed.
    pub fn reset(&mut self, q: usize, plus: bool) {
        let (m, _) = self.measure_z_with(q, || false);
        if m {
            self.pauli(q, Letter::X);
        }
        if plus {
            self.h(q);
        }
    }

    /// Expectation sign of a Pauli product given as `(qubit, letter)` pairs:
    /// `Some(true)` for -1, `Some(false)` for +1, `None` if not a stabilizer.
    pub fn peek_observable(&self, ops: &[(usize, Letter)]) -> Option<bool> {
        let n = self.n;
        let anticommutes = |row: usize| {
            ops.iter().fold(false, |acc, &(q, l)| {
                let (px, pz) = l.bits();
                acc ^ (px && self.get_z(row, q)) ^ (pz && self.get_x(row, q))
            })
        };
        if (n..2 * n).any(anticommutes) {
            return None;
        }
        let mut t = self.clone();
        let scratch = 2 * n;
        t.clear_row(scratch);
        for row in 0..n {
            if anticommutes(row) {
                t.rowsum(scratch, row + n);
            }
        }
        // The scratch row now equals the observable up to sign, with Y = iXZ
        // letters throughout.
        Some(t.r[scratch])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn bell_pair_outcomes_correlate() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut ones = 0;
        for _ in 0..200 {
            let mut t = Tableau::new(2);
            t.h(0);
            t.cnot(0, 1);
            let a = t.measure_z(0, &mut rng);
            let b = t.measure_z(1, &mut rng);
            assert_eq!(a, b);
            ones += a as u32;
        }
        assert!(ones > 50 && ones < 150);
    }

    #[test]
    fn peek_signs() {
        let mut t = Tableau::new(2);
        t.h(0);
        t.cnot(0, 1);
        assert_eq!(t.peek_observable(&[(0, Letter::X), (1, Letter::X)]), Some(false));
        assert_eq!(t.peek_observable(&[(0, Letter::Z), (1, Letter::Z)]), Some(false));
        assert_eq!(t.peek_observable(&[(0, Letter::Y), (1, Letter::Y)]), Some(true));
        assert_eq!(t.peek_observable(&[(0, Letter::Z)]), None);
        t.pauli(0, Letter::X);
        assert_eq!(t.peek_observable(&[(0, Letter::Z), (1, Letter::Z)]), Some(true));
    }

    #[test]
    fn reset_gives_fresh_state() {
        let mut t = Tableau::new(1);
        t.h(0);
        t.reset(0, false);
        assert_eq!(t.peek_observable(&[(0, Letter::Z)]), Some(false));
        t.reset(0, true);
        assert_eq!(t.peek_observable(&[(0, Letter::X)]), Some(false));
    }
}
