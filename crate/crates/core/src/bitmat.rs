//! Sparse binary matrices stored as sorted lists of the column positions of
//! their ones, plus permutations and matrix-vector products over any
//! characteristic-2 group.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::gf2m::{FieldElement, FieldSpec};

/// Symmetric difference of two strictly increasing index lists.
pub fn row_xor(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Size of the symmetric difference without allocating it.
pub fn row_xor_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    a.len() + b.len() - 2 * common
}

/// Inserts `x` into a sorted row if absent, removes it if present.
pub fn toggle(row: &mut Vec<usize>, x: usize) {
    match row.binary_search(&x) {
        Ok(p) => {
            row.remove(p);
        }
        Err(p) => row.insert(p, x),
    }
}

/// Values that can be summed in characteristic 2: field elements and
/// symbolic sums of inputs.
pub trait Additive: Clone {
    fn zero() -> Self;
    fn add_assign(&mut self, other: &Self);

    /// Multiplication by a field constant, where the type supports it.
    fn scale(&self, _field: &FieldSpec, _c: FieldElement) -> Option<Self> {
        None
    }
}

impl Additive for FieldElement {
    fn zero() -> Self {
        FieldElement::ZERO
    }

    fn add_assign(&mut self, other: &Self) {
        *self += *other;
    }

    fn scale(&self, field: &FieldSpec, c: FieldElement) -> Option<Self> {
        Some(field.mul(*self, c))
    }
}

/// A formal sum of inputs `X_j`, kept as the sorted set of indices that occur
/// an odd number of times.
#[derive(Debug, Default, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolicSum(pub Vec<usize>);

impl SymbolicSum {
    pub fn var(j: usize) -> Self {
        SymbolicSum(vec![j])
    }

    pub fn vars(n: usize) -> Vec<Self> {
        (0..n).map(Self::var).collect()
    }

    pub fn terms(&self) -> &[usize] {
        &self.0
    }
}

impl Additive for SymbolicSum {
    fn zero() -> Self {
        SymbolicSum(Vec::new())
    }

    fn add_assign(&mut self, other: &Self) {
        self.0 = row_xor(&self.0, &other.0);
    }

    fn scale(&self, _field: &FieldSpec, c: FieldElement) -> Option<Self> {
        (c == FieldElement::ONE).then(|| self.clone())
    }
}

/// A bijection on `0..n`; `get(i)` is the image of `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &x in &map {
            if x >= map.len() || seen[x] {
                return Err(Error::Precondition("mapping is not a bijection"));
            }
            seen[x] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { map: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { map: inv }
    }

    /// `self` after `other`: `i -> self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Self {
        Permutation { map: other.map.iter().map(|&x| self.map[x]).collect() }
    }
}

/// A binary matrix with each row stored as the increasing list of columns
/// holding a one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    n_cols: usize,
    rows: Vec<Vec<usize>>,
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{}", self.n_rows(), self.n_cols)?;
        for r in 0..self.n_rows() {
            for c in 0..self.n_cols {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl BinaryMatrix {
    pub fn zero(n_rows: usize, n_cols: usize) -> Self {
        BinaryMatrix { n_cols, rows: vec![Vec::new(); n_rows] }
    }

    pub fn identity(n: usize) -> Self {
        BinaryMatrix { n_cols: n, rows: (0..n).map(|i| vec![i]).collect() }
    }

    /// Builds a matrix from explicit rows, which must be strictly increasing
    /// and in range.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        for row in &rows {
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Precondition("row indices must be strictly increasing"));
            }
            if let Some(&last) = row.last() {
                if last >= n_cols {
                    return Err(Error::DimensionMismatch { expected: n_cols, found: last + 1 });
                }
            }
        }
        Ok(BinaryMatrix { n_cols, rows })
    }

    /// Builds a matrix from dense 0/1 rows of equal length.
    pub fn from_dense<R: AsRef<[u8]>>(dense: &[R]) -> Result<Self> {
        let n_cols = dense.first().map_or(0, |r| r.as_ref().len());
        let mut rows = Vec::with_capacity(dense.len());
        for r in dense {
            let r = r.as_ref();
            if r.len() != n_cols {
                return Err(Error::DimensionMismatch { expected: n_cols, found: r.len() });
            }
            rows.push(r.iter().enumerate().filter(|(_, &b)| b != 0).map(|(j, _)| j).collect());
        }
        Ok(BinaryMatrix { n_cols, rows })
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| {
                let mut d = vec![0u8; self.n_cols];
                for &c in row {
                    d[c] = 1;
                }
                d
            })
            .collect()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<usize>> {
        self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].binary_search(&c).is_ok()
    }

    /// Number of ones.
    pub fn weight(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Additions needed to evaluate every row independently. Empty rows cost
    /// nothing; see [`empty_rows`](Self::empty_rows).
    pub fn direct_add_count(&self) -> usize {
        self.rows.iter().map(|r| r.len().saturating_sub(1)).sum()
    }

    /// Rows without any one, for which `weight - n_rows` undercounts.
    pub fn empty_rows(&self) -> Vec<usize> {
        (0..self.rows.len()).filter(|&i| self.rows[i].is_empty()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut rows = vec![Vec::new(); self.n_cols];
        for (r, row) in self.rows.iter().enumerate() {
            for &c in row {
                rows[c].push(r);
            }
        }
        BinaryMatrix { n_cols: self.rows.len(), rows }
    }

    /// Product over GF(2).
    pub fn multiply(&self, rhs: &BinaryMatrix) -> Result<Self> {
        if self.n_cols != rhs.n_rows() {
            return Err(Error::DimensionMismatch { expected: self.n_cols, found: rhs.n_rows() });
        }
        let mut acc = vec![false; rhs.n_cols];
        let rows = self
            .rows
            .iter()
            .map(|row| {
                for &k in row {
                    for &c in rhs.row(k) {
                        acc[c] ^= true;
                    }
                }
                let out: Vec<usize> = (0..rhs.n_cols).filter(|&c| acc[c]).collect();
                acc.iter_mut().for_each(|b| *b = false);
                out
            })
            .collect();
        Ok(BinaryMatrix { n_cols: rhs.n_cols, rows })
    }

    /// Inverse over GF(2) by Gauss-Jordan elimination on bit-packed rows.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.rows.len();
        if self.n_cols != n {
            return Err(Error::DimensionMismatch { expected: n, found: self.n_cols });
        }
        let words = (2 * n).div_ceil(64);
        let mut aug: Vec<Vec<u64>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut w = vec![0u64; words];
                for &c in row {
                    w[c / 64] |= 1 << (c % 64);
                }
                w[(n + i) / 64] |= 1 << ((n + i) % 64);
                w
            })
            .collect();
        let bit = |w: &[u64], c: usize| w[c / 64] >> (c % 64) & 1 == 1;
        for col in 0..n {
            let p = (col..n).find(|&r| bit(&aug[r], col)).ok_or(Error::Singular)?;
            aug.swap(col, p);
            let pivot = aug[col].clone();
            for (r, w) in aug.iter_mut().enumerate() {
                if r != col && bit(w, col) {
                    w.iter_mut().zip(&pivot).for_each(|(a, b)| *a ^= b);
                }
            }
        }
        let rows = aug
            .iter()
            .map(|w| (0..n).filter(|&c| bit(w, n + c)).collect())
            .collect();
        Ok(BinaryMatrix { n_cols: n, rows })
    }

    /// Reorders rows and relabels columns: row `i` of the result is row
    /// `row_perm.get(i)` of `self`, and column `c` of `self` becomes column
    /// `col_perm.get(c)`.
    pub fn permute(&self, row_perm: &Permutation, col_perm: &Permutation) -> Result<Self> {
        if row_perm.len() != self.n_rows() {
            return Err(Error::DimensionMismatch { expected: self.n_rows(), found: row_perm.len() });
        }
        if col_perm.len() != self.n_cols {
            return Err(Error::DimensionMismatch { expected: self.n_cols, found: col_perm.len() });
        }
        let rows = (0..self.n_rows())
            .map(|i| {
                let mut r: Vec<usize> =
                    self.rows[row_perm.get(i)].iter().map(|&c| col_perm.get(c)).collect();
                r.sort_unstable();
                r
            })
            .collect();
        Ok(BinaryMatrix { n_cols: self.n_cols, rows })
    }

    /// `Y_i = sum of x[j] over the ones j of row i`.
    pub fn mat_vec<T: Additive>(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch { expected: self.n_cols, found: x.len() });
        }
        Ok(self
            .rows
            .iter()
            .map(|row| {
                let mut acc = T::zero();
                for &c in row {
                    acc.add_assign(&x[c]);
                }
                acc
            })
            .collect())
    }

    /// Block-diagonal matrix with the given blocks along the diagonal.
    pub fn block_diag<'a>(blocks: impl IntoIterator<Item = &'a BinaryMatrix>) -> Self {
        let mut rows = Vec::new();
        let mut off = 0;
        for b in blocks {
            rows.extend(b.rows.iter().map(|r| r.iter().map(|&c| c + off).collect()));
            off += b.n_cols;
        }
        BinaryMatrix { n_cols: off, rows }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example() -> BinaryMatrix {
        BinaryMatrix::from_dense(&[
            [1u8, 0, 1, 1, 1],
            [1, 1, 1, 1, 1],
            [1, 1, 0, 1, 1],
            [0, 1, 1, 1, 0],
        ])
        .unwrap()
    }

    #[test]
    fn weight_and_direct_count() {
        assert_eq!(BinaryMatrix::identity(4).weight(), 4);
        assert_eq!(BinaryMatrix::identity(4).direct_add_count(), 0);
        assert_eq!(BinaryMatrix::zero(3, 3).weight(), 0);
        assert_eq!(example().weight(), 16);
        assert_eq!(example().direct_add_count(), 12);
        let single = BinaryMatrix::from_rows(9, vec![vec![0, 2, 3, 5, 8]]).unwrap();
        assert_eq!(single.direct_add_count(), 4);
    }

    #[test]
    fn empty_rows_are_flagged() {
        let m = BinaryMatrix::from_rows(3, vec![vec![0, 1], vec![], vec![2]]).unwrap();
        assert_eq!(m.direct_add_count(), 1);
        assert_eq!(m.empty_rows(), vec![1]);
    }

    #[test]
    fn xor_examples() {
        assert_eq!(row_xor(&[0, 2, 3, 4], &[0, 1, 2, 3, 4]), vec![1]);
        assert_eq!(row_xor(&[1, 5], &[1, 5]), Vec::<usize>::new());
        assert_eq!(row_xor(&[0], &[1]), vec![0, 1]);
        assert_eq!(row_xor_len(&[0, 2, 3, 4], &[0, 1, 2, 3, 4]), 1);
    }

    #[test]
    fn from_rows_validates() {
        assert!(BinaryMatrix::from_rows(3, vec![vec![1, 1]]).is_err());
        assert!(BinaryMatrix::from_rows(3, vec![vec![2, 1]]).is_err());
        assert!(BinaryMatrix::from_rows(3, vec![vec![3]]).is_err());
    }

    #[test]
    fn symbolic_mat_vec() {
        let y = example().mat_vec(&SymbolicSum::vars(5)).unwrap();
        assert_eq!(y[0].terms(), &[0, 2, 3, 4]);
        assert_eq!(y[3].terms(), &[1, 2, 3]);
        let id = BinaryMatrix::identity(5).mat_vec(&SymbolicSum::vars(5)).unwrap();
        assert_eq!(id, SymbolicSum::vars(5));
        let z = example().mat_vec(&[FieldElement::ZERO; 5]).unwrap();
        assert!(z.iter().all(|e| e.is_zero()));
        assert!(example().mat_vec(&[FieldElement::ZERO; 4]).is_err());
    }

    #[test]
    fn permutation_basics() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        assert_eq!(p.compose(&p.inverse()), Permutation::identity(3));
        let m = example();
        let same = m.permute(&Permutation::identity(4), &Permutation::identity(5)).unwrap();
        assert_eq!(same, m);
    }

    #[test]
    fn inverse_and_multiply() {
        let a = BinaryMatrix::from_dense(&[[1u8, 1, 0], [0, 1, 1], [1, 1, 1]]).unwrap();
        let inv = a.inverse().unwrap();
        assert_eq!(a.multiply(&inv).unwrap(), BinaryMatrix::identity(3));
        let sing = BinaryMatrix::from_dense(&[[1u8, 1], [1, 1]]).unwrap();
        assert_eq!(sing.inverse(), Err(Error::Singular));
        assert_eq!(example().transpose().transpose(), example());
    }

    #[test]
    fn block_diag_offsets_columns() {
        let b = BinaryMatrix::block_diag([&BinaryMatrix::identity(1), &example()]);
        assert_eq!(b.n_rows(), 5);
        assert_eq!(b.n_cols(), 6);
        assert_eq!(b.row(1), &[1, 3, 4, 5]);
    }
}
