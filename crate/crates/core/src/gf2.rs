//! Bit-packed vectors and matrices over GF(2).
//!
//! Bits are stored little-endian within 64-bit words. Unused high bits of the
//! last word are always zero, so word-level equality and popcounts are exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Builds a vector from 0-indexed positions of its one bits.
    pub fn from_support(len: usize, support: &[usize]) -> Result<Self> {
        let mut v = Self::zeros(len);
        for &i in support {
            if i >= len {
                return Err(Error::dims("bit vector support", len, i + 1));
            }
            v.set(i, true);
        }
        Ok(v)
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if b {
                words[len / WORD_BITS] |= 1 << (len % WORD_BITS);
            }
            len += 1;
        }
        Self { len, words }
    }

    /// Parses a string of `0`/`1` characters, ignoring whitespace and commas.
    pub fn parse_bits(s: &str) -> Option<Self> {
        let mut bits = Vec::new();
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                c if c.is_whitespace() || c == ',' => {}
                _ => return None,
            }
        }
        Some(Self::from_bools(bits))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of the bitwise AND.
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "dot of vectors with different lengths");
        dot_words(&self.words, &other.words)
    }

    pub fn hamming_distance(&self, other: &BitVector) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Positions of the one bits, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + tz)
                }
            })
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn support(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    /// Concatenation `self ‖ other`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        BitVector::from_bools(self.iter().chain(other.iter()))
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

#[inline]
fn dot_words(a: &[u64], b: &[u64]) -> bool {
    let mut acc = 0u64;
    for (x, y) in a.iter().zip(b) {
        acc ^= x & y;
    }
    acc.count_ones() & 1 == 1
}

/// Dense GF(2) matrix with bit-packed rows.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Stacks `rows`, all of which must have length `cols`.
    pub fn from_rows(cols: usize, rows: &[BitVector]) -> Result<Self> {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::dims("matrix row length", cols, r.len()));
            }
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        Ok(m)
    }

    /// Builds a matrix from 0/1 entries; every row must have the same length.
    pub fn from_dense<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::dims("dense matrix row length", cols, r.len()));
            }
            for (j, &b) in r.iter().enumerate() {
                m.set(i, j, b & 1 == 1);
            }
        }
        Ok(m)
    }

    /// Builds a matrix from the 0-indexed supports of its rows.
    pub fn from_supports(cols: usize, supports: &[Vec<usize>]) -> Result<Self> {
        let rows: Vec<BitVector> = supports
            .iter()
            .map(|s| BitVector::from_support(cols, s))
            .collect::<Result<_>>()?;
        Self::from_rows(cols, &rows)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        (self.row_words(i)[j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        let mask = 1u64 << (j % WORD_BITS);
        let w = &mut self.row_words_mut(i)[j / WORD_BITS];
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    pub fn row(&self, i: usize) -> BitVector {
        BitVector {
            len: self.cols,
            words: self.row_words(i).to_vec(),
        }
    }

    pub fn row_vectors(&self) -> Vec<BitVector> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn column(&self, j: usize) -> BitVector {
        BitVector::from_bools((0..self.rows).map(|i| self.get(i, j)))
    }

    /// Column indices of the ones in row `i`, ascending.
    pub fn row_support(&self, i: usize) -> Vec<usize> {
        self.row(i).support()
    }

    pub fn row_weight(&self, i: usize) -> usize {
        self.row_words(i)
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn column_weight(&self, j: usize) -> usize {
        (0..self.rows).filter(|&i| self.get(i, j)).count()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// `M · vᵀ` over GF(2).
    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.cols {
            return Err(Error::dims("matrix-vector product", self.cols, v.len()));
        }
        Ok(BitVector::from_bools(
            (0..self.rows).map(|i| dot_words(self.row_words(i), v.words())),
        ))
    }

    /// `self · otherᵀ`: entry `(i, j)` is the parity of row `i` of `self`
    /// against row `j` of `other`.
    pub fn mul_transpose(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.cols {
            return Err(Error::dims("product with transpose", self.cols, other.cols));
        }
        let mut out = BitMatrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            for j in 0..other.rows {
                if dot_words(self.row_words(i), other.row_words(j)) {
                    out.set(i, j, true);
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in self.row(i).iter_ones() {
                t.set(j, i, true);
            }
        }
        t
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &BitMatrix) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in self.row(i).iter_ones() {
                for k in 0..other.rows {
                    for l in other.row(k).iter_ones() {
                        out.set(i * other.rows + k, j * other.cols + l, true);
                    }
                }
            }
        }
        out
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.rows != other.rows {
            return Err(Error::dims("horizontal stack", self.rows, other.rows));
        }
        let mut out = BitMatrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in self.row(i).iter_ones() {
                out.set(i, j, true);
            }
            for j in other.row(i).iter_ones() {
                out.set(i, self.cols + j, true);
            }
        }
        Ok(out)
    }

    /// Vertical concatenation of `self` above `other`.
    pub fn vstack(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.cols {
            return Err(Error::dims("vertical stack", self.cols, other.cols));
        }
        let mut out = BitMatrix::zeros(self.rows + other.rows, self.cols);
        out.data[..self.data.len()].copy_from_slice(&self.data);
        out.data[self.data.len()..].copy_from_slice(&other.data);
        Ok(out)
    }

    /// Row rank over GF(2).
    pub fn rank(&self) -> usize {
        Echelon::new(self).pivots.len()
    }

    /// Whether `v` is a GF(2) combination of the rows.
    pub fn in_row_space(&self, v: &BitVector) -> Result<bool> {
        if v.len() != self.cols {
            return Err(Error::dims("row-space membership", self.cols, v.len()));
        }
        Ok(Echelon::new(self).reduce(v).is_zero())
    }

    /// A basis of `{ x : M xᵀ = 0 }`, one basis vector per row.
    pub fn nullspace_basis(&self) -> BitMatrix {
        let ech = Echelon::new(self);
        let mut is_pivot = vec![false; self.cols];
        for &p in &ech.pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&j| !is_pivot[j]).collect();
        let mut basis = BitMatrix::zeros(free.len(), self.cols);
        for (b, &f) in free.iter().enumerate() {
            basis.set(b, f, true);
            // RREF: pivot variable p_r = sum of free entries in row r.
            for (r, &p) in ech.pivots.iter().enumerate() {
                if ech.rows.get(r, f) {
                    basis.set(b, p, true);
                }
            }
        }
        basis
    }

    /// Some `x` with `M xᵀ = s`, free variables set to zero.
    pub fn solve(&self, s: &BitVector) -> Result<BitVector> {
        if s.len() != self.rows {
            return Err(Error::dims("linear solve right-hand side", self.rows, s.len()));
        }
        // Eliminate on the transpose-free augmented system [M | s].
        let mut aug = BitMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in self.row(i).iter_ones() {
                aug.set(i, j, true);
            }
            aug.set(i, self.cols, s.get(i));
        }
        let ech = Echelon::with_column_limit(&aug, self.cols);
        // A zero row with rhs 1 means inconsistency.
        for r in ech.pivots.len()..ech.rows.rows {
            if ech.rows.get(r, self.cols) {
                return Err(Error::NoSolution);
            }
        }
        let mut x = BitVector::zeros(self.cols);
        for (r, &p) in ech.pivots.iter().enumerate() {
            if ech.rows.get(r, self.cols) {
                x.set(p, true);
            }
        }
        Ok(x)
    }

    /// Columns `range` as a new matrix.
    pub fn select_columns(&self, range: std::ops::Range<usize>) -> BitMatrix {
        assert!(range.end <= self.cols, "column range out of bounds");
        let mut out = BitMatrix::zeros(self.rows, range.len());
        for i in 0..self.rows {
            for j in self.row(i).iter_ones() {
                if range.contains(&j) {
                    out.set(i, j - range.start, true);
                }
            }
        }
        out
    }

    /// Rows as 0-indexed supports.
    pub fn supports(&self) -> Vec<Vec<usize>> {
        (0..self.rows).map(|i| self.row_support(i)).collect()
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Precomputed row space of a matrix for repeated membership queries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowSpace {
    echelon: Echelon,
}

impl RowSpace {
    pub fn new(m: &BitMatrix) -> Self {
        Self {
            echelon: Echelon::new(m),
        }
    }

    pub fn dim(&self) -> usize {
        self.echelon.pivots.len()
    }

    pub fn ambient_len(&self) -> usize {
        self.echelon.rows.cols
    }

    /// Canonical representative of `v` modulo the row space; two vectors
    /// reduce to the same value iff their sum lies in the row space.
    pub fn reduce(&self, v: &BitVector) -> Result<BitVector> {
        if v.len() != self.ambient_len() {
            return Err(Error::dims("row-space reduction", self.ambient_len(), v.len()));
        }
        Ok(self.echelon.reduce(v))
    }

    pub fn contains(&self, v: &BitVector) -> Result<bool> {
        Ok(self.reduce(v)?.is_zero())
    }
}

/// Reduced row echelon form of a copy of a matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Echelon {
    rows: BitMatrix,
    pivots: Vec<usize>,
}

impl Echelon {
    fn new(m: &BitMatrix) -> Self {
        Self::with_column_limit(m, m.cols)
    }

    /// Eliminates using pivot columns `< limit` only.
    fn with_column_limit(m: &BitMatrix, limit: usize) -> Self {
        let mut a = m.clone();
        let stride = a.stride;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..limit {
            if r == a.rows {
                break;
            }
            let (w, bit) = (c / WORD_BITS, 1u64 << (c % WORD_BITS));
            let Some(p) = (r..a.rows).find(|&i| a.data[i * stride + w] & bit != 0) else {
                continue;
            };
            if p != r {
                for k in 0..stride {
                    a.data.swap(p * stride + k, r * stride + k);
                }
            }
            for i in 0..a.rows {
                if i != r && a.data[i * stride + w] & bit != 0 {
                    for k in 0..stride {
                        let v = a.data[r * stride + k];
                        a.data[i * stride + k] ^= v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        Echelon { rows: a, pivots }
    }

    /// Residual of `v` after clearing every pivot column.
    fn reduce(&self, v: &BitVector) -> BitVector {
        let mut out = v.clone();
        for (r, &p) in self.pivots.iter().enumerate() {
            if out.get(p) {
                for (o, w) in out.words.iter_mut().zip(self.rows.row_words(r)) {
                    *o ^= w;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

fn tail_mask(bits: usize) -> u64 {
    match bits % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

impl BitVector {
    fn debug_check_padding(&self) -> bool {
        self.words
            .last()
            .is_none_or(|&w| w & !tail_mask(self.len) == 0)
    }
}


    fn steane_h1() -> BitMatrix {
        BitMatrix::from_dense(&[
            [1u8, 1, 1, 0, 1, 0, 0],
            [0, 1, 1, 1, 0, 1, 0],
            [0, 0, 1, 0, 1, 1, 1],
        ])
        .unwrap()
    }

    // Naive reference implementations on Vec<Vec<bool>>.
    fn naive_rank(m: &[Vec<bool>]) -> usize {
        let mut a = m.to_vec();
        let cols = a.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for c in 0..cols {
            if let Some(p) = (rank..a.len()).find(|&i| a[i][c]) {
                a.swap(rank, p);
                for i in 0..a.len() {
                    if i != rank && a[i][c] {
                        for k in 0..cols {
                            let v = a[rank][k];
                            a[i][k] ^= v;
                        }
                    }
                }
                rank += 1;
            }
        }
        rank
    }

    fn naive_mul(m: &[Vec<bool>], v: &[bool]) -> Vec<bool> {
        m.iter()
            .map(|r| r.iter().zip(v).filter(|(a, b)| **a && **b).count() % 2 == 1)
            .collect()
    }

    fn to_bool_rows(m: &BitMatrix) -> Vec<Vec<bool>> {
        (0..m.rows()).map(|i| m.row(i).iter().collect()).collect()
    }

    fn arb_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = BitMatrix> {
        (0..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
            prop::collection::vec(prop::collection::vec(0u8..2, c), r).prop_map(move |rows| {
                if rows.is_empty() {
                    BitMatrix::zeros(0, c)
                } else {
                    BitMatrix::from_dense(&rows).unwrap()
                }
            })
        })
    }

    #[test]
    fn mat_vec_examples() {
        let h = steane_h1();
        let e3 = BitVector::from_support(7, &[2]).unwrap();
        assert_eq!(h.mul_vec(&e3).unwrap().to_string(), "111");
        assert!(h.mul_vec(&BitVector::zeros(7)).unwrap().is_zero());
        let v = BitVector::parse_bits("1110100").unwrap();
        assert_eq!(h.mul_vec(&v).unwrap().to_string(), "000");
        assert!(matches!(
            h.mul_vec(&BitVector::zeros(6)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(BitMatrix::identity(3).rank(), 3);
        assert_eq!(BitMatrix::zeros(4, 5).rank(), 0);
        assert_eq!(steane_h1().rank(), 3);
        assert_eq!(BitMatrix::zeros(0, 0).rank(), 0);
    }

    #[test]
    fn row_space_examples() {
        let m = BitMatrix::from_dense(&[[1u8, 1, 0], [0, 1, 1]]).unwrap();
        assert!(m.in_row_space(&BitVector::zeros(3)).unwrap());
        assert!(m.in_row_space(&BitVector::parse_bits("101").unwrap()).unwrap());
        assert!(!m.in_row_space(&BitVector::parse_bits("100").unwrap()).unwrap());
        let id = BitMatrix::identity(4);
        assert!(id.in_row_space(&BitVector::parse_bits("1011").unwrap()).unwrap());
        assert!(m.in_row_space(&BitVector::zeros(2)).is_err());
    }

    #[test]
    fn nullspace_examples() {
        assert_eq!(BitMatrix::identity(5).nullspace_basis().rows(), 0);
        assert_eq!(BitMatrix::zeros(1, 3).nullspace_basis().rows(), 3);
        let h = steane_h1();
        let ns = h.nullspace_basis();
        assert_eq!(ns.rows(), 4);
        assert_eq!(ns.rank(), 4);
        for b in ns.row_vectors() {
            assert!(h.mul_vec(&b).unwrap().is_zero());
        }
    }

    #[test]
    fn solve_finds_preimage_or_reports_none() {
        let h = steane_h1();
        let s = BitVector::parse_bits("101").unwrap();
        let x = h.solve(&s).unwrap();
        assert_eq!(h.mul_vec(&x).unwrap(), s);
        let rep = BitMatrix::from_dense(&[[1u8, 1], [1, 1]]).unwrap();
        assert!(matches!(
            rep.solve(&BitVector::parse_bits("10").unwrap()),
            Err(Error::NoSolution)
        ));
    }

    #[test]
    fn kron_and_stacks() {
        let a = BitMatrix::from_dense(&[[1u8, 1]]).unwrap();
        let k = a.kron(&BitMatrix::identity(2));
        assert_eq!(
            k,
            BitMatrix::from_dense(&[[1u8, 0, 1, 0], [0, 1, 0, 1]]).unwrap()
        );
        let h = a.hstack(&BitMatrix::identity(1)).unwrap();
        assert_eq!(h, BitMatrix::from_dense(&[[1u8, 1, 1]]).unwrap());
        let v = a.vstack(&a).unwrap();
        assert_eq!(v.rows(), 2);
        assert_eq!(v.transpose().rows(), 2);
    }

    #[test]
    fn padding_stays_clear() {
        let mut v = BitVector::zeros(70);
        v.set(69, true);
        v.flip(3);
        assert!(v.debug_check_padding());
        assert_eq!(v.support(), vec![3, 69]);
        let w = BitVector::from_bools((0..130).map(|i| i % 3 == 0));
        assert!(w.debug_check_padding());
        assert_eq!(w.weight(), 44);
    }

    proptest! {
        #[test]
        fn rank_matches_naive(m in arb_matrix(12, 90)) {
            let r = m.rank();
            prop_assert_eq!(r, naive_rank(&to_bool_rows(&m)));
            prop_assert!(r <= m.rows().min(m.cols()));
        }

        #[test]
        fn rank_invariant_under_row_permutation(m in arb_matrix(10, 40), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rows = m.row_vectors();
            rows.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let p = BitMatrix::from_rows(m.cols(), &rows).unwrap();
            prop_assert_eq!(p.rank(), m.rank());
        }

        #[test]
        fn mul_vec_matches_naive_and_is_linear(
            m in arb_matrix(10, 80),
            bits in prop::collection::vec(any::<bool>(), 160),
        ) {
            let n = m.cols();
            let u = BitVector::from_bools(bits[..n].iter().copied());
            let v = BitVector::from_bools(bits[80..80 + n].iter().copied());
            let mu = m.mul_vec(&u).unwrap();
            let expected: Vec<bool> = naive_mul(&to_bool_rows(&m), &bits[..n]);
            prop_assert_eq!(mu.iter().collect::<Vec<_>>(), expected);
            let lhs = m.mul_vec(&u.xor(&v)).unwrap();
            prop_assert_eq!(lhs, mu.xor(&m.mul_vec(&v).unwrap()));
        }

        #[test]
        fn row_space_iff_rank_unchanged(
            m in arb_matrix(8, 20),
            bits in prop::collection::vec(any::<bool>(), 20),
        ) {
            let v = BitVector::from_bools(bits[..m.cols()].iter().copied());
            let stacked = m.vstack(&BitMatrix::from_rows(m.cols(), std::slice::from_ref(&v)).unwrap()).unwrap();
            prop_assert_eq!(m.in_row_space(&v).unwrap(), stacked.rank() == m.rank());
        }

        #[test]
        fn nullspace_is_a_kernel_basis(m in arb_matrix(10, 70)) {
            let ns = m.nullspace_basis();
            prop_assert_eq!(ns.rows(), m.cols() - m.rank());
            prop_assert_eq!(ns.rank(), ns.rows());
            for b in ns.row_vectors() {
                prop_assert!(m.mul_vec(&b).unwrap().is_zero());
            }
        }
    }
}
