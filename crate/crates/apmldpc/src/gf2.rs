//! Dense bit-packed linear algebra over GF(2).
//!
//! Matrices are row-major with each row padded to whole 64-bit words; bits
//! beyond the logical column count are kept zero at all times. Elimination
//! is deterministic (pivot on the lowest column with a set bit) and the
//! resulting reduced profile is cached immutably per matrix, so repeated
//! rank and membership queries against the same matrix are cheap.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

const WORD_BITS: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("support indices must be strictly increasing")]
    UnsortedSupport,
}

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// A binary vector of fixed length with a lazily cached Hamming weight.
#[derive(Clone)]
pub struct Gf2Vector {
    len: usize,
    bits: Vec<u64>,
    weight: OnceLock<usize>,
}

impl Gf2Vector {
    pub fn zeros(len: usize) -> Self {
        Gf2Vector {
            len,
            bits: vec![0; words_for(len)],
            weight: OnceLock::new(),
        }
    }

    /// Builds a vector from a strictly increasing support list.
    pub fn from_support(len: usize, support: &[usize]) -> Result<Self, Gf2Error> {
        let mut v = Gf2Vector::zeros(len);
        let mut last = None;
        for &idx in support {
            if idx >= len {
                return Err(Gf2Error::IndexOutOfRange { index: idx, dim: len });
            }
            if last.is_some_and(|p| p >= idx) {
                return Err(Gf2Error::UnsortedSupport);
            }
            last = Some(idx);
            v.bits[idx / WORD_BITS] |= 1 << (idx % WORD_BITS);
        }
        Ok(v)
    }

    pub(crate) fn from_words(len: usize, bits: Vec<u64>) -> Self {
        debug_assert_eq!(bits.len(), words_for(len));
        debug_assert!(tail_clean(len, &bits));
        Gf2Vector {
            len,
            bits,
            weight: OnceLock::new(),
        }
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.len
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[must_use]
    pub fn get(&self, idx: usize) -> bool {
        assert!(idx < self.len, "bit index out of range");
        self.bits[idx / WORD_BITS] >> (idx % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, idx: usize, value: bool) {
        assert!(idx < self.len, "bit index out of range");
        let (w, m) = (idx / WORD_BITS, 1u64 << (idx % WORD_BITS));
        if value {
            self.bits[w] |= m;
        } else {
            self.bits[w] &= !m;
        }
        self.weight = OnceLock::new();
    }

    /// Hamming weight; computed once and cached.
    #[must_use]
    pub fn weight(&self) -> usize {
        *self
            .weight
            .get_or_init(|| self.bits.iter().map(|w| w.count_ones() as usize).sum())
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &Gf2Vector) {
        assert_eq!(self.len, other.len, "vector length mismatch");
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a ^= b;
        }
        self.weight = OnceLock::new();
    }

    /// Parity of the overlap with `other`.
    #[must_use]
    pub fn dot(&self, other: &Gf2Vector) -> bool {
        assert_eq!(self.len, other.len, "vector length mismatch");
        self.bits
            .iter()
            .zip(&other.bits)
            .fold(0u64, |acc, (a, b)| acc ^ (a & b))
            .count_ones()
            & 1
            == 1
    }

    /// Indices of set bits, ascending.
    #[must_use]
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weight());
        for (wi, &w) in self.bits.iter().enumerate() {
            let mut word = w;
            while word != 0 {
                let b = word.trailing_zeros() as usize;
                out.push(wi * WORD_BITS + b);
                word &= word - 1;
            }
        }
        out
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.bits
    }
}

fn tail_clean(len: usize, bits: &[u64]) -> bool {
    if len % WORD_BITS == 0 {
        return true;
    }
    match bits.last() {
        Some(&w) => w >> (len % WORD_BITS) == 0,
        None => true,
    }
}

impl PartialEq for Gf2Vector {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.bits == other.bits
    }
}

impl Eq for Gf2Vector {}

impl std::hash::Hash for Gf2Vector {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.len.hash(state);
        self.bits.hash(state);
    }
}

impl fmt::Debug for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Vector[{}; wt {}]", self.len, self.weight())
    }
}

/// Reduced row echelon data for a matrix: pivot columns and the reduced
/// nonzero rows, in pivot order. Immutable once computed.
#[derive(Clone, Debug)]
pub struct EliminationProfile {
    cols: usize,
    words_per_row: usize,
    pivot_cols: Vec<usize>,
    reduced_bits: Vec<u64>,
}

impl EliminationProfile {
    #[must_use]
    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }

    #[must_use]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[must_use]
    pub fn pivot_cols(&self) -> &[usize] {
        &self.pivot_cols
    }

    fn reduced_row(&self, i: usize) -> &[u64] {
        &self.reduced_bits[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    /// Reduces `v` against the row basis in place; the result is zero iff
    /// `v` lies in the row space.
    fn reduce_words(&self, words: &mut [u64]) {
        for (i, &p) in self.pivot_cols.iter().enumerate() {
            let (w, m) = (p / WORD_BITS, 1u64 << (p % WORD_BITS));
            if words[w] & m != 0 {
                let row = self.reduced_row(i);
                for k in w..self.words_per_row {
                    words[k] ^= row[k];
                }
            }
        }
    }

    #[must_use]
    pub fn contains(&self, v: &Gf2Vector) -> bool {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        let mut words = v.bits.clone();
        self.reduce_words(&mut words);
        words.iter().all(|&w| w == 0)
    }

    /// Rank of the matrix with `v` appended as an extra row.
    #[must_use]
    pub fn rank_with(&self, v: &Gf2Vector) -> usize {
        self.rank() + usize::from(!self.contains(v))
    }
}

/// A dense bit-packed binary matrix.
#[derive(Clone)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
    profile: OnceLock<EliminationProfile>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let wpr = words_for(cols);
        Gf2Matrix {
            rows,
            cols,
            words_per_row: wpr,
            bits: vec![0; rows * wpr],
            profile: OnceLock::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Gf2Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[Gf2Vector]) -> Self {
        let cols = rows.first().map_or(0, Gf2Vector::len);
        let mut m = Gf2Matrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            m.row_words_mut(i).copy_from_slice(&r.bits);
        }
        m
    }

    #[must_use]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[must_use]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[must_use]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        self.bits[r * self.words_per_row + c / WORD_BITS] >> (c % WORD_BITS) & 1 == 1
    }

    /// Setting a bit invalidates the cached elimination profile.
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        let idx = r * self.words_per_row + c / WORD_BITS;
        let m = 1u64 << (c % WORD_BITS);
        if value {
            self.bits[idx] |= m;
        } else {
            self.bits[idx] &= !m;
        }
        self.profile = OnceLock::new();
    }

    pub fn flip(&mut self, r: usize, c: usize) {
        assert!(r < self.rows && c < self.cols, "matrix index out of range");
        self.bits[r * self.words_per_row + c / WORD_BITS] ^= 1 << (c % WORD_BITS);
        self.profile = OnceLock::new();
    }

    fn row_words(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        let wpr = self.words_per_row;
        &mut self.bits[r * wpr..(r + 1) * wpr]
    }

    #[must_use]
    pub fn row(&self, r: usize) -> Gf2Vector {
        Gf2Vector::from_words(self.cols, self.row_words(r).to_vec())
    }

    /// Set-bit column indices of row `r`, ascending.
    #[must_use]
    pub fn row_support(&self, r: usize) -> Vec<usize> {
        self.row(r).support()
    }

    #[must_use]
    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    #[must_use]
    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `self * v` treating `v` as a column vector of length `cols`.
    #[must_use]
    pub fn mat_vec(&self, v: &Gf2Vector) -> Gf2Vector {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        let mut out = Gf2Vector::zeros(self.rows);
        for r in 0..self.rows {
            let parity = self
                .row_words(r)
                .iter()
                .zip(&v.bits)
                .fold(0u64, |acc, (a, b)| acc ^ (a & b))
                .count_ones()
                & 1;
            if parity == 1 {
                out.bits[r / WORD_BITS] |= 1 << (r % WORD_BITS);
            }
        }
        out
    }

    /// XOR of the rows selected by the set bits of `coeffs`, i.e. the row
    /// vector `coeffs^T * self`.
    #[must_use]
    pub fn row_combination(&self, coeffs: &Gf2Vector) -> Gf2Vector {
        assert_eq!(coeffs.len(), self.rows, "dimension mismatch");
        let mut acc = vec![0u64; self.words_per_row];
        for r in coeffs.support() {
            for (a, b) in acc.iter_mut().zip(self.row_words(r)) {
                *a ^= b;
            }
        }
        Gf2Vector::from_words(self.cols, acc)
    }

    #[must_use]
    pub fn mat_mul(&self, rhs: &Gf2Matrix) -> Gf2Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Gf2Matrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let wpr = out.words_per_row;
            let mut acc = vec![0u64; wpr];
            for (wi, &w) in self.row_words(r).iter().enumerate() {
                let mut word = w;
                while word != 0 {
                    let j = wi * WORD_BITS + word.trailing_zeros() as usize;
                    word &= word - 1;
                    for (a, b) in acc.iter_mut().zip(rhs.row_words(j)) {
                        *a ^= b;
                    }
                }
            }
            out.bits[r * wpr..(r + 1) * wpr].copy_from_slice(&acc);
        }
        out
    }

    #[must_use]
    pub fn transposed(&self) -> Gf2Matrix {
        let mut out = Gf2Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for (wi, &w) in self.row_words(r).iter().enumerate() {
                let mut word = w;
                while word != 0 {
                    let c = wi * WORD_BITS + word.trailing_zeros() as usize;
                    word &= word - 1;
                    out.bits[c * out.words_per_row + r / WORD_BITS] |= 1 << (r % WORD_BITS);
                }
            }
        }
        out
    }

    /// Stacks `self` on top of `other`; column counts must agree.
    #[must_use]
    pub fn stacked(&self, other: &Gf2Matrix) -> Gf2Matrix {
        assert_eq!(self.cols, other.cols, "column count mismatch");
        let mut out = Gf2Matrix::zeros(self.rows + other.rows, self.cols);
        out.bits[..self.bits.len()].copy_from_slice(&self.bits);
        out.bits[self.bits.len()..].copy_from_slice(&other.bits);
        out
    }

    /// The submatrix formed by the listed columns, in the given order.
    pub fn column_submatrix(&self, cols: &[usize]) -> Result<Gf2Matrix, Gf2Error> {
        for &c in cols {
            if c >= self.cols {
                return Err(Gf2Error::IndexOutOfRange { index: c, dim: self.cols });
            }
        }
        let mut out = Gf2Matrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            let src = self.row_words(r);
            let dst = &mut out.bits[r * out.words_per_row..(r + 1) * out.words_per_row];
            for (i, &c) in cols.iter().enumerate() {
                if src[c / WORD_BITS] >> (c % WORD_BITS) & 1 == 1 {
                    dst[i / WORD_BITS] |= 1 << (i % WORD_BITS);
                }
            }
        }
        Ok(out)
    }

    /// The cached reduced row echelon profile, computing it on first use.
    pub fn profile(&self) -> &EliminationProfile {
        self.profile.get_or_init(|| self.compute_profile())
    }

    fn compute_profile(&self) -> EliminationProfile {
        let wpr = self.words_per_row;
        let mut work = self.bits.clone();
        let mut pivot_cols = Vec::new();
        let mut pivot_buf = vec![0u64; wpr];
        let mut next = 0usize;
        for col in 0..self.cols {
            if next == self.rows {
                break;
            }
            let (w, m) = (col / WORD_BITS, 1u64 << (col % WORD_BITS));
            let Some(found) = (next..self.rows).find(|&r| work[r * wpr + w] & m != 0) else {
                continue;
            };
            if found != next {
                for k in 0..wpr {
                    work.swap(found * wpr + k, next * wpr + k);
                }
            }
            pivot_buf.copy_from_slice(&work[next * wpr..(next + 1) * wpr]);
            for r in 0..self.rows {
                if r != next && work[r * wpr + w] & m != 0 {
                    for k in w..wpr {
                        work[r * wpr + k] ^= pivot_buf[k];
                    }
                }
            }
            pivot_cols.push(col);
            next += 1;
        }
        let reduced_bits = work[..next * wpr].to_vec();
        EliminationProfile {
            cols: self.cols,
            words_per_row: wpr,
            pivot_cols,
            reduced_bits,
        }
    }

    #[must_use]
    pub fn rank(&self) -> usize {
        self.profile().rank()
    }

    #[must_use]
    pub fn in_row_space(&self, v: &Gf2Vector) -> bool {
        self.profile().contains(v)
    }

    /// A basis of `{v : self * v = 0}`, ordered by free column ascending.
    #[must_use]
    pub fn kernel_basis(&self) -> Vec<Gf2Vector> {
        let prof = self.profile();
        let mut is_pivot = vec![false; self.cols];
        for &p in &prof.pivot_cols {
            is_pivot[p] = true;
        }
        let mut basis = Vec::with_capacity(self.cols - prof.rank());
        for f in 0..self.cols {
            if is_pivot[f] {
                continue;
            }
            let mut v = Gf2Vector::zeros(self.cols);
            v.set(f, true);
            let (w, m) = (f / WORD_BITS, 1u64 << (f % WORD_BITS));
            for (i, &p) in prof.pivot_cols.iter().enumerate() {
                if prof.reduced_row(i)[w] & m != 0 {
                    v.set(p, true);
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Kernel vectors supported inside `support` (strictly increasing column
    /// indices), re-embedded into full length.
    pub fn solve_restricted(&self, support: &[usize]) -> Result<Vec<Gf2Vector>, Gf2Error> {
        for pair in support.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Gf2Error::UnsortedSupport);
            }
        }
        let sub = self.column_submatrix(support)?;
        let basis = sub.kernel_basis();
        let mut out = Vec::with_capacity(basis.len());
        for b in basis {
            let mut v = Gf2Vector::zeros(self.cols);
            for i in b.support() {
                v.set(support[i], true);
            }
            out.push(v);
        }
        Ok(out)
    }
}

impl PartialEq for Gf2Matrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.bits == other.bits
    }
}

impl Eq for Gf2Matrix {}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Matrix[{}x{}]", self.rows, self.cols)
    }
}

impl fmt::Display for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                write!(f, "{}", u8::from(self.get(r, c)))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize, density: f64) -> Gf2Matrix {
        let mut m = Gf2Matrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if rng.gen::<f64>() < density {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    /// Oracle: size of the row span by enumerating all row combinations.
    fn span_size(m: &Gf2Matrix) -> usize {
        assert!(m.rows() <= 16);
        let mut seen = std::collections::HashSet::new();
        for mask in 0u32..1 << m.rows() {
            let mut coeffs = Gf2Vector::zeros(m.rows());
            for r in 0..m.rows() {
                if mask >> r & 1 == 1 {
                    coeffs.set(r, true);
                }
            }
            seen.insert(m.row_combination(&coeffs).support());
        }
        seen.len()
    }

    fn span_contains(m: &Gf2Matrix, v: &Gf2Vector) -> bool {
        assert!(m.rows() <= 16);
        (0u32..1 << m.rows()).any(|mask| {
            let mut coeffs = Gf2Vector::zeros(m.rows());
            for r in 0..m.rows() {
                if mask >> r & 1 == 1 {
                    coeffs.set(r, true);
                }
            }
            m.row_combination(&coeffs) == *v
        })
    }

    #[test]
    fn identity_rank() {
        assert_eq!(Gf2Matrix::identity(3).rank(), 3);
    }

    #[test]
    fn rank_matches_span_enumeration() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..40 {
            let m = random_matrix(&mut rng, 6, 8, 0.4);
            assert_eq!(1usize << m.rank(), span_size(&m));
        }
    }

    #[test]
    fn zero_matrix_kernel_is_everything() {
        let m = Gf2Matrix::zeros(2, 4);
        assert_eq!(m.kernel_basis().len(), 4);
    }

    #[test]
    fn kernel_matches_exhaustive_membership() {
        let mut rng = StdRng::seed_from_u64(12);
        for _ in 0..20 {
            let m = random_matrix(&mut rng, 5, 9, 0.4);
            let basis = Gf2Matrix::from_rows(&m.kernel_basis());
            assert_eq!(basis.rows() + m.rank(), m.cols());
            for mask in 0u32..1 << 9 {
                let mut v = Gf2Vector::zeros(9);
                for c in 0..9 {
                    if mask >> c & 1 == 1 {
                        v.set(c, true);
                    }
                }
                let in_kernel = m.mat_vec(&v).is_zero();
                let in_span = basis.rows() == 0 && v.is_zero() || span_contains(&basis, &v);
                assert_eq!(in_kernel, in_span || v.is_zero());
            }
        }
    }

    #[test]
    fn row_space_membership_matches_enumeration() {
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..30 {
            let m = random_matrix(&mut rng, 6, 10, 0.4);
            for _ in 0..20 {
                let mut v = Gf2Vector::zeros(10);
                for c in 0..10 {
                    if rng.gen::<f64>() < 0.5 {
                        v.set(c, true);
                    }
                }
                assert_eq!(m.in_row_space(&v), span_contains(&m, &v));
            }
        }
    }

    #[test]
    fn solve_restricted_full_support_equals_kernel() {
        let mut rng = StdRng::seed_from_u64(14);
        let m = random_matrix(&mut rng, 5, 9, 0.4);
        let all: Vec<usize> = (0..9).collect();
        assert_eq!(m.solve_restricted(&all).unwrap(), m.kernel_basis());
    }

    #[test]
    fn solve_restricted_stays_in_kernel_and_support() {
        let mut rng = StdRng::seed_from_u64(15);
        for _ in 0..30 {
            let m = random_matrix(&mut rng, 7, 14, 0.3);
            let support = [1usize, 3, 4, 8, 11, 13];
            for v in m.solve_restricted(&support).unwrap() {
                assert!(m.mat_vec(&v).is_zero());
                assert!(v.support().iter().all(|i| support.contains(i)));
            }
        }
    }

    #[test]
    fn solve_restricted_edge_cases() {
        let m = Gf2Matrix::identity(4);
        assert!(m.solve_restricted(&[]).unwrap().is_empty());
        assert_eq!(
            m.solve_restricted(&[2, 7]),
            Err(Gf2Error::IndexOutOfRange { index: 7, dim: 4 })
        );
        assert_eq!(m.solve_restricted(&[3, 1]), Err(Gf2Error::UnsortedSupport));
    }

    #[test]
    fn mat_mul_matches_naive() {
        let mut rng = StdRng::seed_from_u64(16);
        for _ in 0..25 {
            let a = random_matrix(&mut rng, 4, 6, 0.5);
            let b = random_matrix(&mut rng, 6, 5, 0.5);
            let ab = a.mat_mul(&b);
            for r in 0..4 {
                for c in 0..5 {
                    let mut acc = false;
                    for k in 0..6 {
                        acc ^= a.get(r, k) & b.get(k, c);
                    }
                    assert_eq!(ab.get(r, c), acc);
                }
            }
        }
    }

    #[test]
    fn mat_vec_identity_is_identity() {
        let m = Gf2Matrix::identity(9);
        let v = Gf2Vector::from_support(9, &[0, 3, 8]).unwrap();
        assert_eq!(m.mat_vec(&v), v);
    }

    #[test]
    fn weight_cache_matches_popcount() {
        let mut v = Gf2Vector::from_support(130, &[0, 64, 129]).unwrap();
        assert_eq!(v.weight(), 3);
        v.set(1, true);
        assert_eq!(v.weight(), 4);
        v.set(64, false);
        assert_eq!(v.weight(), 3);
    }

    proptest! {
        #[test]
        fn rank_is_transpose_invariant(seed in 0u64..500) {
            let mut rng = StdRng::seed_from_u64(seed);
            let rows = rng.gen_range(1..12);
            let cols = rng.gen_range(1..12);
            let m = random_matrix(&mut rng, rows, cols, 0.4);
            prop_assert_eq!(m.rank(), m.transposed().rank());
        }

        #[test]
        fn rank_plus_kernel_dim_is_cols(seed in 0u64..500) {
            let mut rng = StdRng::seed_from_u64(seed);
            let rows = rng.gen_range(1..14);
            let cols = rng.gen_range(1..14);
            let m = random_matrix(&mut rng, rows, cols, 0.35);
            prop_assert_eq!(m.rank() + m.kernel_basis().len(), m.cols());
        }

        #[test]
        fn membership_equals_augmented_rank(seed in 0u64..500) {
            let mut rng = StdRng::seed_from_u64(seed);
            let rows = rng.gen_range(1..10);
            let cols = rng.gen_range(1..12);
            let m = random_matrix(&mut rng, rows, cols, 0.4);
            let v = random_matrix(&mut rng, 1, cols, 0.5).row(0);
            let stacked = m.stacked(&Gf2Matrix::from_rows(std::slice::from_ref(&v)));
            prop_assert_eq!(m.in_row_space(&v), stacked.rank() == m.rank());
            prop_assert_eq!(m.profile().rank_with(&v), stacked.rank());
        }

        #[test]
        fn kernel_vectors_annihilate(seed in 0u64..500) {
            let mut rng = StdRng::seed_from_u64(seed);
            let rows = rng.gen_range(1..12);
            let cols = rng.gen_range(1..16);
            let m = random_matrix(&mut rng, rows, cols, 0.4);
            for v in m.kernel_basis() {
                prop_assert!(m.mat_vec(&v).is_zero());
            }
        }
    }
}
