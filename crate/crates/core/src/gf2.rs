//! Linear algebra over the two-element field.
//!
//! Vectors are packed into 64-bit words. Elimination always picks the
//! leftmost pivot column and, within it, the topmost available row, so every
//! basis produced here is reproducible across runs.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("subspace is not contained in the enclosing subspace")]
    NotContained,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

const WORD: usize = 64;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self { len, words: vec![0; words_for(len)] }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector from 0/1 entries; any odd entry counts as one.
    pub fn from_bits(bits: &[u8]) -> Self {
        Self::from_bools(bits.iter().map(|b| b & 1 == 1))
    }

    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
            v.flip(i);
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
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn and(&self, other: &BitVec) -> BitVec {
        assert_eq!(self.len, other.len);
        BitVec {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len);
        let ones: u32 = self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones()).sum();
        ones % 2 == 1
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(k, w)| k * WORD + w.trailing_zeros() as usize)
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * WORD + t)
                }
            })
        })
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }

    /// Keeps only the coordinates listed in `keep`, in that order.
    pub fn select(&self, keep: &[usize]) -> BitVec {
        BitVec::from_bools(keep.iter().map(|&i| self.get(i)))
    }

    /// Inverse of [`BitVec::select`]: spreads the entries back to a vector of
    /// length `len`, zero elsewhere.
    pub fn scatter(&self, keep: &[usize], len: usize) -> BitVec {
        assert_eq!(self.len, keep.len());
        BitVec::from_indices(len, self.iter_ones().map(|i| keep[i]))
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.len {
            write!(f, "{}", self.get(i) as u8)?;
        }
        write!(f, "]")
    }
}

/// Dense matrix over GF(2), one packed bit vector per row.
#[derive(Clone, PartialEq, Eq)]
pub struct GF2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

impl GF2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BitVec::zeros(cols); rows] }
    }

    pub fn identity(n: usize) -> Self {
        Self { rows: n, cols: n, data: (0..n).map(|i| BitVec::unit(n, i)).collect() }
    }

    pub fn from_row_vecs(cols: usize, rows: Vec<BitVec>) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row length does not match column count");
        }
        Self { rows: rows.len(), cols, data: rows }
    }

    /// Row-major 0/1 nested slices. All rows must have equal length.
    pub fn from_rows(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_row_vecs(cols, rows.iter().map(|r| BitVec::from_bits(r)).collect())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[BitVec]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for i in c.iter_ones() {
                m.set(i, j, true);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.data[i].set(j, value)
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.data[i]
    }

    pub fn row_vecs(&self) -> &[BitVec] {
        &self.data
    }

    pub fn column(&self, j: usize) -> BitVec {
        BitVec::from_bools((0..self.rows).map(|i| self.get(i, j)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BitVec::is_zero)
    }

    pub fn transpose(&self) -> GF2Matrix {
        let mut t = GF2Matrix::zeros(self.cols, self.rows);
        for (i, r) in self.data.iter().enumerate() {
            for j in r.iter_ones() {
                t.set(j, i, true);
            }
        }
        t
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &GF2Matrix) -> GF2Matrix {
        assert_eq!(self.cols, rhs.rows, "incompatible shapes for product");
        let data = self
            .data
            .iter()
            .map(|r| {
                let mut acc = BitVec::zeros(rhs.cols);
                for k in r.iter_ones() {
                    acc.xor_assign(&rhs.data[k]);
                }
                acc
            })
            .collect();
        GF2Matrix { rows: self.rows, cols: rhs.cols, data }
    }

    /// Column action `self * v`.
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(self.cols, v.len());
        BitVec::from_bools(self.data.iter().map(|r| r.dot(v)))
    }

    /// Row action `v * self`.
    pub fn vec_mul(&self, v: &BitVec) -> BitVec {
        assert_eq!(self.rows, v.len());
        let mut acc = BitVec::zeros(self.cols);
        for i in v.iter_ones() {
            acc.xor_assign(&self.data[i]);
        }
        acc
    }

    /// Restriction to the listed rows and columns.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> GF2Matrix {
        GF2Matrix::from_row_vecs(cols.len(), rows.iter().map(|&i| self.data[i].select(cols)).collect())
    }

    pub fn rank(&self) -> usize {
        row_echelon(self.data.clone(), self.cols).pivots.len()
    }

    /// Basis of `{v : self * v = 0}`.
    pub fn kernel_basis(&self) -> GF2Subspace {
        let ech = reduced_row_echelon(self.data.clone(), self.cols);
        let pivot_cols: Vec<usize> = ech.pivots.iter().map(|&(_, c)| c).collect();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivot_cols {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVec::unit(self.cols, free);
            for &(r, c) in &ech.pivots {
                if ech.rows[r].get(free) {
                    v.set(c, true);
                }
            }
            basis.push(v);
        }
        GF2Subspace { ambient_dim: self.cols, basis }
    }

    /// Basis of the column space.
    pub fn image_basis(&self) -> GF2Subspace {
        let cols: Vec<BitVec> = (0..self.cols).map(|j| self.column(j)).collect();
        GF2Subspace::span(self.rows, cols)
    }
}

impl fmt::Debug for GF2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GF2Matrix {}x{}", self.rows, self.cols)?;
        for r in &self.data {
            writeln!(f, "  {r:?}")?;
        }
        Ok(())
    }
}

struct Echelon {
    rows: Vec<BitVec>,
    /// (row index, pivot column), in increasing column order.
    pivots: Vec<(usize, usize)>,
}

fn row_echelon(mut rows: Vec<BitVec>, cols: usize) -> Echelon {
    let mut pivots = Vec::new();
    let mut next = 0;
    for c in 0..cols {
        let Some(p) = (next..rows.len()).find(|&r| rows[r].get(c)) else { continue };
        rows.swap(next, p);
        let pivot_row = rows[next].clone();
        for r in rows.iter_mut().skip(next + 1) {
            if r.get(c) {
                r.xor_assign(&pivot_row);
            }
        }
        pivots.push((next, c));
        next += 1;
        if next == rows.len() {
            break;
        }
    }
    Echelon { rows, pivots }
}

fn reduced_row_echelon(rows: Vec<BitVec>, cols: usize) -> Echelon {
    let mut ech = row_echelon(rows, cols);
    for k in (0..ech.pivots.len()).rev() {
        let (r, c) = ech.pivots[k];
        let pivot_row = ech.rows[r].clone();
        for above in 0..r {
            if ech.rows[above].get(c) {
                ech.rows[above].xor_assign(&pivot_row);
            }
        }
    }
    ech
}

/// A linear subspace of GF(2)^n given by an independent basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GF2Subspace {
    ambient_dim: usize,
    basis: Vec<BitVec>,
}

impl GF2Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self { ambient_dim, basis: Vec::new() }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self { ambient_dim, basis: (0..ambient_dim).map(|i| BitVec::unit(ambient_dim, i)).collect() }
    }

    /// Span of arbitrary vectors; dependent vectors are dropped, keeping the
    /// earliest ones.
    pub fn span(ambient_dim: usize, vectors: impl IntoIterator<Item = BitVec>) -> Self {
        let mut reducer = Reducer::new(ambient_dim);
        let mut basis = Vec::new();
        for v in vectors {
            assert_eq!(v.len(), ambient_dim);
            if reducer.insert(v.clone()) {
                basis.push(v);
            }
        }
        Self { ambient_dim, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BitVec] {
        &self.basis
    }

    pub fn into_basis(self) -> Vec<BitVec> {
        self.basis
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        let mut reducer = Reducer::new(self.ambient_dim);
        for b in &self.basis {
            reducer.insert(b.clone());
        }
        reducer.reduce(v).is_zero()
    }

    pub fn contains_subspace(&self, other: &GF2Subspace) -> bool {
        if other.ambient_dim != self.ambient_dim {
            return false;
        }
        let mut reducer = Reducer::new(self.ambient_dim);
        for b in &self.basis {
            reducer.insert(b.clone());
        }
        other.basis.iter().all(|v| reducer.reduce(v).is_zero())
    }
}

/// `dim(inside) - dim(sub)`, after checking `sub ⊆ inside`.
pub fn quotient_dim(sub: &GF2Subspace, inside: &GF2Subspace) -> Result<usize, Gf2Error> {
    if sub.ambient_dim != inside.ambient_dim {
        return Err(Gf2Error::DimensionMismatch { expected: inside.ambient_dim, found: sub.ambient_dim });
    }
    if !inside.contains_subspace(sub) {
        return Err(Gf2Error::NotContained);
    }
    Ok(inside.dim() - sub.dim())
}

/// Incremental elimination that remembers how each stored row was built from
/// the inserted vectors, so reductions can report their coordinates.
#[derive(Clone, Debug)]
pub struct Reducer {
    dim: usize,
    rows: Vec<(usize, BitVec, BitVec)>,
    inserted: usize,
}

impl Reducer {
    pub fn new(dim: usize) -> Self {
        Self { dim, rows: Vec::new(), inserted: 0 }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Number of vectors offered through [`Reducer::insert`] so far.
    pub fn inserted(&self) -> usize {
        self.inserted
    }

    /// Reduces `v` against the stored rows and returns what remains.
    pub fn reduce(&self, v: &BitVec) -> BitVec {
        self.reduce_tracked(v).0
    }

    /// Like [`Reducer::reduce`], also returning which inserted vectors were
    /// used (as a combination over insertion order, 0-indexed).
    pub fn reduce_tracked(&self, v: &BitVec) -> (BitVec, Vec<usize>) {
        assert_eq!(v.len(), self.dim);
        let mut rem = v.clone();
        let mut combo = BitVec::zeros(self.inserted.max(1));
        for (pivot, row, tag) in &self.rows {
            if rem.get(*pivot) {
                rem.xor_assign(row);
                let mut t = tag.clone();
                grow(&mut t, combo.len());
                combo.xor_assign(&t);
            }
        }
        let used = combo.iter_ones().filter(|&i| i < self.inserted).collect();
        (rem, used)
    }

    /// Inserts `v`; returns whether it was independent of earlier insertions.
    pub fn insert(&mut self, v: BitVec) -> bool {
        let idx = self.inserted;
        self.inserted += 1;
        let (rem, used) = self.reduce_tracked(&v);
        let Some(pivot) = rem.first_one() else { return false };
        let mut tag = BitVec::from_indices(self.inserted, used);
        tag.flip(idx);
        // keep rows fully reduced against the new pivot
        for (_, row, rtag) in self.rows.iter_mut() {
            if row.get(pivot) {
                row.xor_assign(&rem);
                grow(rtag, tag.len());
                rtag.xor_assign(&tag);
            }
        }
        self.rows.push((pivot, rem, tag));
        true
    }
}

fn grow(v: &mut BitVec, len: usize) {
    if v.len() < len {
        let mut w = BitVec::zeros(len);
        for i in v.iter_ones() {
            w.set(i, true);
        }
        *v = w;
    }
}
