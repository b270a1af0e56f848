//! Dense GF(2) vectors and the few linear-algebra routines the code library needs.

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_support(len: usize, support: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in support {
            v.set(i, true);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        let m = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn dot(&self, other: &BitVec) -> bool {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum::<u32>() % 2 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len).filter(|&i| self.get(i)).collect()
    }

    fn lowest(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }
}

/// Incrementally maintained reduced basis; `insert` reports whether the vector
/// was independent of everything inserted so far.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: Vec<(usize, BitVec)>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reduce(&self, v: &BitVec) -> BitVec {
        let mut v = v.clone();
        for (pivot, row) in &self.rows {
            if v.get(*pivot) {
                v.xor_assign(row);
            }
        }
        v
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        self.reduce(v).is_zero()
    }

    pub fn insert(&mut self, v: &BitVec) -> bool {
        let r = self.reduce(v);
        match r.lowest() {
            None => false,
            Some(p) => {
                for (_, row) in self.rows.iter_mut() {
                    if row.get(p) {
                        row.xor_assign(&r);
                    }
                }
                self.rows.push((p, r));
                true
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

pub fn rank(rows: &[BitVec]) -> usize {
    let mut e = Echelon::new();
    rows.iter().filter(|r| e.insert(r)).count()
}

/// Basis of `{x : row . x = 0 for all rows}`.
pub fn nullspace(rows: &[BitVec], n: usize) -> Vec<BitVec> {
    let mut e = Echelon::new();
    for r in rows {
        e.insert(r);
    }
    let pivots: Vec<usize> = e.rows.iter().map(|(p, _)| *p).collect();
    let mut basis = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = BitVec::zeros(n);
        v.set(free, true);
        for (p, row) in &e.rows {
            if row.get(free) {
                v.set(*p, true);
            }
        }
        basis.push(v);
    }
    basis
}

/// Inverse of a square matrix given by rows, or `None` when singular.
pub fn inverse(rows: &[BitVec]) -> Option<Vec<BitVec>> {
    let n = rows.len();
    let mut a: Vec<BitVec> = rows.to_vec();
    let mut inv: Vec<BitVec> = (0..n).map(|i| BitVec::from_support(n, &[i])).collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| a[r].get(col))?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        for r in 0..n {
            if r != col && a[r].get(col) {
                let (ar, ir) = (a[col].clone(), inv[col].clone());
                a[r].xor_assign(&ar);
                inv[r].xor_assign(&ir);
            }
        }
    }
    Some(inv)
}

/// Solves `M x = b` where `M` is given by rows; returns one solution.
pub fn solve(rows: &[BitVec], b: &[bool], n: usize) -> Option<BitVec> {
    let m = rows.len();
    let mut aug: Vec<(BitVec, bool)> = rows.iter().cloned().zip(b.iter().copied()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..m).find(|&i| aug[i].0.get(col)) else { continue };
        aug.swap(r, p);
        for i in 0..m {
            if i != r && aug[i].0.get(col) {
                let (row, bit) = (aug[r].0.clone(), aug[r].1);
                aug[i].0.xor_assign(&row);
                aug[i].1 ^= bit;
            }
        }
        pivots.push(col);
        r += 1;
    }
    if aug[r..].iter().any(|(_, bit)| *bit) {
        return None;
    }
    let mut x = BitVec::zeros(n);
    for (i, &c) in pivots.iter().enumerate() {
        x.set(c, aug[i].1);
    }
    Some(x)
}

/// 2x2 GF(2) matrix stored row-major as `[a, b, c, d]` for `[[a, b], [c, d]]`.
pub type Mat2 = [u8; 4];

pub const IDENTITY2: Mat2 = [1, 0, 0, 1];

pub fn mat2_mul(a: Mat2, b: Mat2) -> Mat2 {
    [
        (a[0] & b[0]) ^ (a[1] & b[2]),
        (a[0] & b[1]) ^ (a[1] & b[3]),
        (a[2] & b[0]) ^ (a[3] & b[2]),
        (a[2] & b[1]) ^ (a[3] & b[3]),
    ]
}

pub fn mat2_apply(a: Mat2, v: [bool; 2]) -> [bool; 2] {
    let (x, y) = (v[0] as u8, v[1] as u8);
    [((a[0] & x) ^ (a[1] & y)) == 1, ((a[2] & x) ^ (a[3] & y)) == 1]
}

pub fn mat2_inverse(a: Mat2) -> Option<Mat2> {
    let det = (a[0] & a[3]) ^ (a[1] & a[2]);
    (det == 1).then_some([a[3], a[1], a[2], a[0]])
}

pub fn mat2_transpose(a: Mat2) -> Mat2 {
    [a[0], a[2], a[1], a[3]]
}

/// The six invertible 2x2 matrices over GF(2).
pub fn gl2() -> Vec<Mat2> {
    (0..16u8)
        .map(|m| [m & 1, m >> 1 & 1, m >> 2 & 1, m >> 3 & 1])
        .filter(|a| mat2_inverse(*a).is_some())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: usize, s: &[usize]) -> BitVec {
        BitVec::from_support(n, s)
    }

    #[test]
    fn nullspace_dimension() {
        let rows = vec![v(4, &[0, 1, 2, 3])];
        let ns = nullspace(&rows, 4);
        assert_eq!(ns.len(), 3);
        for x in &ns {
            assert!(!rows[0].dot(x));
        }
    }

    #[test]
    fn inverse_round_trip() {
        let m = vec![v(3, &[0, 1]), v(3, &[1]), v(3, &[0, 2])];
        let inv = inverse(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let col: BitVec = BitVec::from_support(3, &(0..3).filter(|&k| inv[k].get(j)).collect::<Vec<_>>());
                assert_eq!(m[i].dot(&col), i == j);
            }
        }
        assert!(inverse(&[v(2, &[0, 1]), v(2, &[0, 1])]).is_none());
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let m = vec![v(3, &[0, 1]), v(3, &[1, 2]), v(3, &[0, 2])];
        let x = solve(&m, &[true, true, false], 3).unwrap();
        assert!(m[0].dot(&x) && m[1].dot(&x) && !m[2].dot(&x));
        assert!(solve(&m, &[true, true, true], 3).is_none());
    }

    #[test]
    fn gl2_has_six_elements() {
        let g = gl2();
        assert_eq!(g.len(), 6);
        for a in g {
            assert_eq!(mat2_mul(a, mat2_inverse(a).unwrap()), IDENTITY2);
        }
    }
}
