//! Dense binary relations on `{0..n}` and the relation algebra used by the
//! coherent-configuration proofs: transpose, dot product, transitive closure.

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Row-major bit matrix; row `i` occupies `words` consecutive `u64`s.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix { n, words, bits: vec![0; n * words] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn words_per_row(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + (j >> 6)] >> (j & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + (j >> 6)] |= 1 << (j & 63);
    }

    #[inline]
    pub fn unset(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + (j >> 6)] &= !(1 << (j & 63));
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.bits[i * self.words..(i + 1) * self.words]
    }

    pub fn row_count(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_row(&self, i: usize) -> BitIter<'_> {
        BitIter::new(self.row(i))
    }

    /// `|row(i) & row(j)|`
    #[inline]
    pub fn and_count(&self, i: usize, j: usize) -> usize {
        self.row(i)
            .iter()
            .zip(self.row(j))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Pushes the indices of `row(i) & row(j)` into `out` (cleared first).
    pub fn and_into(&self, i: usize, j: usize, out: &mut Vec<usize>) {
        out.clear();
        for (w, (a, b)) in self.row(i).iter().zip(self.row(j)).enumerate() {
            let mut x = a & b;
            while x != 0 {
                out.push(w * 64 + x.trailing_zeros() as usize);
                x &= x - 1;
            }
        }
    }

    /// Clears columns `lo..hi` of row `i`.
    pub fn clear_row_range(&mut self, i: usize, lo: usize, hi: usize) {
        for j in lo..hi {
            self.unset(i, j);
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::new(self.n);
        for i in 0..self.n {
            for j in self.iter_row(i) {
                t.set(j, i);
            }
        }
        t
    }

    pub fn as_words(&self) -> &[u64] {
        &self.bits
    }
}

impl std::fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BitMatrix(n={}, ones={})", self.n, self.count_ones())
    }
}

pub struct BitIter<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl<'a> BitIter<'a> {
    fn new(words: &'a [u64]) -> Self {
        BitIter { words, idx: 0, cur: words.first().copied().unwrap_or(0) }
    }
}

impl Iterator for BitIter<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let b = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.idx * 64 + b);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

/// A binary relation on `{0..n}`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Relation {
    matrix: BitMatrix,
    symmetric: bool,
}

impl Relation {
    pub fn empty(n: usize) -> Self {
        Relation { matrix: BitMatrix::new(n), symmetric: true }
    }

    pub fn from_matrix(matrix: BitMatrix) -> Self {
        let symmetric = is_symmetric(&matrix);
        Relation { matrix, symmetric }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut m = BitMatrix::new(n);
        for (a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::Domain { expected: n, got: a.max(b) + 1 });
            }
            m.set(a, b);
        }
        Ok(Relation::from_matrix(m))
    }

    /// `1_Ω`
    pub fn diagonal(n: usize) -> Self {
        Relation::from_pairs(n, (0..n).map(|i| (i, i))).expect("in range")
    }

    /// `1_α`
    pub fn point(n: usize, alpha: usize) -> Result<Self> {
        Relation::from_pairs(n, [(alpha, alpha)])
    }

    pub fn full(n: usize) -> Self {
        Relation::from_pairs(n, (0..n).flat_map(|i| (0..n).map(move |j| (i, j)))).expect("in range")
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    #[inline]
    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.matrix.get(a, b)
    }

    pub fn len(&self) -> usize {
        self.matrix.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Out-neighbourhood `αr`.
    pub fn successors(&self, a: usize) -> BitIter<'_> {
        self.matrix.iter_row(a)
    }

    pub fn out_degree(&self, a: usize) -> usize {
        self.matrix.row_count(a)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |a| self.successors(a).map(move |b| (a, b)))
    }

    fn check_domain(&self, other: &Relation) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::Domain { expected: self.n(), got: other.n() });
        }
        Ok(())
    }

    pub fn transpose(&self) -> Relation {
        Relation { matrix: self.matrix.transpose(), symmetric: self.symmetric }
    }

    /// `r·s = {(α,β) : (α,γ) ∈ r, (γ,β) ∈ s for some γ}`
    pub fn dot(&self, other: &Relation) -> Result<Relation> {
        self.check_domain(other)?;
        let n = self.n();
        let mut m = BitMatrix::new(n);
        for a in 0..n {
            let mut acc = vec![0u64; m.words_per_row()];
            for g in self.successors(a) {
                for (x, y) in acc.iter_mut().zip(other.matrix.row(g)) {
                    *x |= y;
                }
            }
            m.row_mut(a).copy_from_slice(&acc);
        }
        Ok(Relation::from_matrix(m))
    }

    /// Smallest transitive relation containing `self` (Warshall on bit rows).
    pub fn transitive_closure(&self) -> Relation {
        let n = self.n();
        let mut m = self.matrix.clone();
        let w = m.words_per_row();
        let mut row_k = vec![0u64; w];
        for k in 0..n {
            row_k.copy_from_slice(m.row(k));
            for i in 0..n {
                if m.get(i, k) {
                    for (x, y) in m.row_mut(i).iter_mut().zip(&row_k) {
                        *x |= y;
                    }
                }
            }
        }
        Relation::from_matrix(m)
    }

    pub fn union(&self, other: &Relation) -> Result<Relation> {
        self.check_domain(other)?;
        let mut m = self.matrix.clone();
        for (x, y) in m.bits.iter_mut().zip(&other.matrix.bits) {
            *x |= y;
        }
        Ok(Relation::from_matrix(m))
    }

    pub fn intersection(&self, other: &Relation) -> Result<Relation> {
        self.check_domain(other)?;
        let mut m = self.matrix.clone();
        for (x, y) in m.bits.iter_mut().zip(&other.matrix.bits) {
            *x &= y;
        }
        Ok(Relation::from_matrix(m))
    }

    pub fn is_subset_of(&self, other: &Relation) -> bool {
        self.n() == other.n()
            && self.matrix.bits.iter().zip(&other.matrix.bits).all(|(a, b)| a & !b == 0)
    }

    /// SHA-256 over `n` followed by the sorted pair list, both little-endian
    /// u32. Stable across platforms.
    pub fn sha256_hex(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.n() as u32).to_le_bytes());
        for (a, b) in self.pairs() {
            h.update((a as u32).to_le_bytes());
            h.update((b as u32).to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

fn is_symmetric(m: &BitMatrix) -> bool {
    (0..m.n()).all(|i| m.iter_row(i).all(|j| m.get(j, i)))
}
