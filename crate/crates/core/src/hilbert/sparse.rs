use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Rows shorter than this are applied serially; the rayon split costs more
/// than it saves on small operators.
const PAR_ROWS: usize = 4096;

/// Real square operator in compressed sparse row layout.
///
/// Column indices inside a row are strictly increasing and no explicit zeros
/// are stored. Hamiltonians built by this crate are exactly symmetric; ladder
/// operators such as `J+` are not, so symmetry is a checked property rather
/// than a type-level guarantee.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseOperator {
    /// Builds an operator from `(row, col, value)` triplets in any order.
    /// Duplicates are summed and entries that end up exactly zero are dropped.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut entries: Vec<(usize, usize, f64)> = triplets.into_iter().collect();
        entries.sort_by_key(|a| (a.0, a.1));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals = Vec::with_capacity(entries.len());
        let mut iter = entries.into_iter().peekable();
        while let Some((r, c, mut v)) = iter.next() {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside dimension {dim}");
            while let Some(&(r2, c2, v2)) = iter.peek() {
                if r2 == r && c2 == c {
                    v += v2;
                    iter.next();
                } else {
                    break;
                }
            }
            if v != 0.0 {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseOperator {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        SparseOperator {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self::from_triplets(
            diag.len(),
            diag.iter().enumerate().map(|(i, &v)| (i, i, v)),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterates over the stored `(column, value)` pairs of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    /// Iterates over all stored entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[span.clone()].binary_search(&c) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`. Rows are independent, so the parallel split does not change
    /// the floating-point result.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let row_dot = |r: usize| -> f64 {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            acc
        };
        if self.dim >= PAR_ROWS {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(r, out)| *out = row_dot(r));
        } else {
            for (r, out) in y.iter_mut().enumerate() {
                *out = row_dot(r);
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.apply_into(x, &mut y);
        y
    }

    /// `vᵀ A v`, checked for dimension.
    pub fn expectation(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok((0..self.dim)
            .map(|r| v[r] * self.row(r).map(|(c, a)| a * v[c]).sum::<f64>())
            .sum())
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.dim, self.entries().map(|(r, c, v)| (c, r, v)))
    }

    /// Exact structural and numerical symmetry (tolerance zero).
    pub fn is_symmetric(&self) -> bool {
        self.entries().all(|(r, c, v)| self.get(c, r) == v)
    }

    pub fn scaled(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::zeros(self.dim);
        }
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        let diff = self - other;
        diff.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute row sum, an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, r)).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        Self::from_triplets(
            n,
            (0..n).flat_map(|r| (0..n).map(move |c| (r, c, m[(r, c)]))),
        )
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        assert_eq!(self.dim, other.dim, "operator dimensions differ");
        Self::from_triplets(
            self.dim,
            self.entries()
                .chain(other.entries().map(|(r, c, v)| (r, c, sign * v))),
        )
    }
}

impl Add for &SparseOperator {
    type Output = SparseOperator;
    fn add(self, rhs: &SparseOperator) -> SparseOperator {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &SparseOperator {
    type Output = SparseOperator;
    fn sub(self, rhs: &SparseOperator) -> SparseOperator {
        self.combine(rhs, -1.0)
    }
}

impl Mul<f64> for &SparseOperator {
    type Output = SparseOperator;
    fn mul(self, rhs: f64) -> SparseOperator {
        self.scaled(rhs)
    }
}

/// Operator product.
impl Mul for &SparseOperator {
    type Output = SparseOperator;
    fn mul(self, rhs: &SparseOperator) -> SparseOperator {
        assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
        let mut triplets = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in rhs.row(k) {
                    triplets.push((r, c, a * b));
                }
            }
        }
        SparseOperator::from_triplets(self.dim, triplets)
    }
}

/// Kronecker product `A ⊗ B` with row-major composite index `iA·dim(B) + iB`.
pub fn kron(a: &SparseOperator, b: &SparseOperator) -> SparseOperator {
    let db = b.dim;
    let dim = a.dim * db;
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::with_capacity(a.nnz() * b.nnz());
    let mut vals = Vec::with_capacity(a.nnz() * b.nnz());
    row_ptr.push(0);
    for ra in 0..a.dim {
        for rb in 0..db {
            // A's columns ascend and B's columns ascend, so ca·db + cb ascends.
            for (ca, va) in a.row(ra) {
                for (cb, vb) in b.row(rb) {
                    let v = va * vb;
                    if v != 0.0 {
                        cols.push(ca * db + cb);
                        vals.push(v);
                    }
                }
            }
            row_ptr.push(cols.len());
        }
    }
    SparseOperator {
        dim,
        row_ptr,
        cols,
        vals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let op = SparseOperator::from_triplets(2, [(0, 1, 1.0), (0, 1, 2.0), (1, 0, 1.0), (1, 0, -1.0)]);
        assert_eq!(op.get(0, 1), 3.0);
        assert_eq!(op.nnz(), 1);
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let id = kron(&SparseOperator::identity(2), &SparseOperator::identity(3));
        assert_eq!(id, SparseOperator::identity(6));
    }

    #[test]
    fn kron_of_diagonal_and_identity() {
        let jz = SparseOperator::diagonal(&[-0.5, 0.5]);
        let k = kron(&jz, &SparseOperator::identity(2));
        assert_eq!(k, SparseOperator::diagonal(&[-0.5, -0.5, 0.5, 0.5]));
    }

    #[test]
    fn product_and_sum_match_dense() {
        let a = SparseOperator::from_triplets(3, [(0, 1, 2.0), (1, 2, -1.0), (2, 0, 0.5)]);
        let b = SparseOperator::from_triplets(3, [(0, 0, 1.0), (1, 1, 3.0), (2, 1, 4.0)]);
        let dense = a.to_dense() * b.to_dense();
        assert_eq!((&a * &b).to_dense(), dense);
        assert_eq!((&a + &b).to_dense(), a.to_dense() + b.to_dense());
        assert_eq!((&a - &a).nnz(), 0);
    }

    #[test]
    fn expectation_rejects_wrong_length() {
        let id = SparseOperator::identity(3);
        assert!(matches!(
            id.expectation(&[1.0, 0.0]),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
    }
}
