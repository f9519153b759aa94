//! The full Fock space over `n` generators, cut at word length `m`.
//!
//! Basis vectors `e_α` are indexed by words over the letters `1..=n`,
//! ordered by length and then lexicographically:
//! for `n = 2, m = 2` the order is `∅, g1, g2, g1g1, g1g2, g2g1, g2g2`.
//! Every operator that raises word length is therefore strictly block
//! lower triangular in this basis.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ONE};

/// A word in the free semigroup; the empty word is the unit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Letters are 1-based generator labels; validity against `n` is checked
    /// where the word meets a [`TruncatedFock`].
    pub fn new(letters: Vec<usize>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reverse(&self) -> Word {
        reverse(self)
    }

    /// `self` followed by `letter`.
    pub fn append(&self, letter: usize) -> Word {
        let mut letters = self.0.clone();
        letters.push(letter);
        Word(letters)
    }

    /// `letter` followed by `self`.
    pub fn prepend(&self, letter: usize) -> Word {
        let mut letters = Vec::with_capacity(self.0.len() + 1);
        letters.push(letter);
        letters.extend_from_slice(&self.0);
        Word(letters)
    }
}

impl From<&[usize]> for Word {
    fn from(letters: &[usize]) -> Self {
        Word(letters.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        for letter in &self.0 {
            write!(f, "g{letter}")?;
        }
        Ok(())
    }
}

pub fn reverse(w: &Word) -> Word {
    Word(w.0.iter().rev().copied().collect())
}

/// Words of length at most `m` over `n` letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedFock {
    n: usize,
    m: usize,
    dim: usize,
    /// `offsets[l]` is the index of the first word of length `l`; one extra
    /// entry holds `dim`.
    offsets: Vec<usize>,
}

impl TruncatedFock {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::BadDim("Fock space needs at least one generator".into()));
        }
        let mut offsets = Vec::with_capacity(m + 2);
        let mut total: usize = 0;
        let mut level: usize = 1;
        for _ in 0..=m {
            offsets.push(total);
            total = total
                .checked_add(level)
                .ok_or_else(|| Error::BadDim(format!("Fock space n={n}, m={m} is too large")))?;
            level = level.saturating_mul(n);
        }
        offsets.push(total);
        Ok(TruncatedFock { n, m, dim: total, offsets })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index range of the words of length `level`.
    pub fn level_range(&self, level: usize) -> std::ops::Range<usize> {
        self.offsets[level]..self.offsets[level + 1]
    }

    /// Length of the word at `index`.
    pub fn level_of(&self, index: usize) -> usize {
        debug_assert!(index < self.dim);
        self.offsets.partition_point(|&o| o <= index) - 1
    }

    pub fn word_index(&self, w: &Word) -> Result<usize> {
        word_index(w, self)
    }

    pub fn word_at(&self, index: usize) -> Word {
        assert!(index < self.dim, "index {index} out of range for dim {}", self.dim);
        let level = self.level_of(index);
        let mut rank = index - self.offsets[level];
        let mut letters = vec![0; level];
        for slot in letters.iter_mut().rev() {
            *slot = rank % self.n + 1;
            rank /= self.n;
        }
        Word(letters)
    }

    /// All basis words in index order.
    pub fn words(&self) -> impl Iterator<Item = Word> + '_ {
        (0..self.dim).map(|i| self.word_at(i))
    }

    fn check_generator(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n {
            return Err(Error::BadGenerator { index: i, n: self.n });
        }
        Ok(())
    }

    /// Index of `w·g_i` for a word at `index` of length `< m`.
    fn append_index(&self, index: usize, level: usize, i: usize) -> usize {
        let rank = index - self.offsets[level];
        self.offsets[level + 1] + rank * self.n + (i - 1)
    }

    /// Index of `g_i·w` for a word at `index` of length `< m`.
    fn prepend_index(&self, index: usize, level: usize, i: usize) -> usize {
        let rank = index - self.offsets[level];
        self.offsets[level + 1] + (i - 1) * self.n.pow(level as u32) + rank
    }

    /// For every basis index with word length `< m`, the index of `α·g_i`.
    /// Returned as `(source, target)` pairs in increasing source order.
    pub fn right_shift_pairs(&self, i: usize) -> Result<Vec<(usize, usize)>> {
        self.check_generator(i)?;
        let mut pairs = Vec::with_capacity(self.offsets[self.m]);
        for level in 0..self.m {
            for idx in self.level_range(level) {
                pairs.push((idx, self.append_index(idx, level, i)));
            }
        }
        Ok(pairs)
    }

    pub fn right_creation(&self, i: usize) -> Result<ComplexMatrix> {
        right_creation(self, i)
    }

    pub fn left_creation(&self, i: usize) -> Result<ComplexMatrix> {
        left_creation(self, i)
    }
}

pub fn word_index(w: &Word, space: &TruncatedFock) -> Result<usize> {
    if w.len() > space.m {
        return Err(Error::WordTooLong { len: w.len(), max: space.m });
    }
    let mut rank = 0usize;
    for &letter in w.letters() {
        space.check_generator(letter)?;
        rank = rank * space.n + (letter - 1);
    }
    Ok(space.offsets[w.len()] + rank)
}

/// Compression of `R_i : e_α ↦ e_{α g_i}` to words of length `≤ m`.
pub fn right_creation(space: &TruncatedFock, i: usize) -> Result<ComplexMatrix> {
    let mut out = ComplexMatrix::zeros(space.dim, space.dim);
    for (src, dst) in space.right_shift_pairs(i)? {
        out.set(dst, src, ONE);
    }
    Ok(out)
}

/// Compression of `S_i : e_α ↦ e_{g_i α}` to words of length `≤ m`.
pub fn left_creation(space: &TruncatedFock, i: usize) -> Result<ComplexMatrix> {
    space.check_generator(i)?;
    let mut out = ComplexMatrix::zeros(space.dim, space.dim);
    for level in 0..space.m {
        for idx in space.level_range(level) {
            out.set(space.prepend_index(idx, level, i), idx, ONE);
        }
    }
    Ok(out)
}

/// Permutation `Π e_α = e_α̃`.
pub fn reversal_permutation(space: &TruncatedFock) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(space.dim, space.dim);
    for idx in 0..space.dim {
        let target = word_index(&space.word_at(idx).reverse(), space).expect("reversal keeps length");
        out.set(target, idx, Complex64::new(1.0, 0.0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use proptest::prelude::*;

    fn w(letters: &[usize]) -> Word {
        Word::from(letters)
    }

    /// Basis vector image: the unique nonzero row in column `col`, if any.
    fn image(m: &ComplexMatrix, col: usize) -> Option<usize> {
        let rows: Vec<usize> = (0..m.rows()).filter(|&r| m.get(r, col) != ZERO).collect();
        assert!(rows.len() <= 1);
        rows.first().copied()
    }

    #[test]
    fn dimensions() {
        assert_eq!(TruncatedFock::new(2, 2).unwrap().dim(), 7);
        assert_eq!(TruncatedFock::new(3, 3).unwrap().dim(), 40);
        assert_eq!(TruncatedFock::new(1, 3).unwrap().dim(), 4);
        assert_eq!(TruncatedFock::new(4, 0).unwrap().dim(), 1);
        assert!(TruncatedFock::new(0, 2).is_err());
    }

    #[test]
    fn word_index_examples() {
        let s = TruncatedFock::new(2, 2).unwrap();
        assert_eq!(word_index(&Word::empty(), &s).unwrap(), 0);
        assert_eq!(word_index(&w(&[2]), &s).unwrap(), 2);
        assert_eq!(word_index(&w(&[2, 2]), &s).unwrap(), 6);
        let order: Vec<String> = s.words().map(|w| w.to_string()).collect();
        assert_eq!(order, ["∅", "g1", "g2", "g1g1", "g1g2", "g2g1", "g2g2"]);
        assert!(matches!(word_index(&w(&[1, 1, 1]), &s), Err(Error::WordTooLong { len: 3, max: 2 })));
        assert!(matches!(word_index(&w(&[3]), &s), Err(Error::BadGenerator { index: 3, n: 2 })));
    }

    #[test]
    fn reverse_examples() {
        assert_eq!(reverse(&Word::empty()), Word::empty());
        assert_eq!(reverse(&w(&[1, 2])), w(&[2, 1]));
        assert_eq!(reverse(&w(&[1, 1, 2])), w(&[2, 1, 1]));
    }

    #[test]
    fn right_creation_examples() {
        let s = TruncatedFock::new(2, 2).unwrap();
        let r1 = right_creation(&s, 1).unwrap();
        assert_eq!(image(&r1, 0), Some(1));
        assert_eq!(image(&r1, 2), Some(5));
        let r2 = right_creation(&s, 2).unwrap();
        assert_eq!(image(&r2, 6), None);
        assert!(matches!(right_creation(&s, 0), Err(Error::BadGenerator { .. })));
    }

    #[test]
    fn left_creation_examples() {
        let s = TruncatedFock::new(2, 2).unwrap();
        assert_eq!(image(&left_creation(&s, 2).unwrap(), 0), Some(2));
        assert_eq!(image(&left_creation(&s, 1).unwrap(), 2), Some(4));
        let s1 = TruncatedFock::new(1, 3).unwrap();
        let shift = left_creation(&s1, 1).unwrap();
        assert!(shift.pow(3).max_abs() > 0.0);
        assert_eq!(shift.pow(4).max_abs(), 0.0);
    }

    #[test]
    fn level_bookkeeping() {
        let s = TruncatedFock::new(3, 3).unwrap();
        for idx in 0..s.dim() {
            let word = s.word_at(idx);
            assert_eq!(s.level_of(idx), word.len());
            assert_eq!(word_index(&word, &s).unwrap(), idx);
        }
    }

    fn check_creation_relations(n: usize, m: usize) {
        let s = TruncatedFock::new(n, m).unwrap();
        let dim = s.dim();
        let below_top = ComplexMatrix::from_fn(dim, dim, |i, j| {
            if i == j && s.level_of(i) < m { ONE } else { ZERO }
        });
        let rs: Vec<_> = (1..=n).map(|i| right_creation(&s, i).unwrap()).collect();
        let mut row_sum = ComplexMatrix::zeros(dim, dim);
        for (i, ri) in rs.iter().enumerate() {
            for (j, rj) in rs.iter().enumerate() {
                let prod = &ri.adjoint() * rj;
                let want = if i == j { below_top.clone() } else { ComplexMatrix::zeros(dim, dim) };
                assert_eq!(prod.max_abs_diff(&want), 0.0);
            }
            row_sum += &(ri * &ri.adjoint());
            assert_eq!(ri.pow(m as u32 + 1).max_abs(), 0.0);
        }
        // Σ R_i R_i* is a 0/1 diagonal projection.
        for i in 0..dim {
            for j in 0..dim {
                let v = row_sum.get(i, j);
                assert!(v == ZERO || (i == j && v == ONE));
            }
        }
        let pi = reversal_permutation(&s);
        for i in 1..=n {
            let conj = &(&pi * &right_creation(&s, i).unwrap()) * &pi.adjoint();
            assert_eq!(conj.max_abs_diff(&left_creation(&s, i).unwrap()), 0.0);
        }
    }

    #[test]
    fn creation_relations_small() {
        for (n, m) in [(1, 0), (1, 4), (2, 0), (2, 3), (3, 2)] {
            check_creation_relations(n, m);
        }
    }

    proptest! {
        #[test]
        fn index_roundtrip(n in 1usize..5, letters in proptest::collection::vec(1usize..5, 0..5)) {
            let letters: Vec<usize> = letters.into_iter().map(|l| (l - 1) % n + 1).collect();
            let s = TruncatedFock::new(n, 5).unwrap();
            let word = Word::new(letters);
            let idx = word_index(&word, &s).unwrap();
            prop_assert!(idx < s.dim());
            prop_assert_eq!(s.word_at(idx), word.clone());
            prop_assert_eq!(reverse(&reverse(&word)), word);
        }

        #[test]
        fn creation_relations(n in 1usize..4, m in 0usize..4) {
            check_creation_relations(n, m);
        }
    }
}
