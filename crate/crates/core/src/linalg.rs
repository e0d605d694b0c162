//! Dense exact linear algebra: echelon forms, ranks and kernels.
//!
//! Elimination never permutes columns. Kernel extraction reads the
//! transformation block of an augmented system `[M | I]`, which only works if
//! the left block keeps its column order.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::field::Field;

/// Row-major dense matrix. The entry type is whatever the field uses.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has the wrong length");
        Self { rows, cols, data }
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self::from_vec(rows, cols, vec![value; rows * cols])
    }

    /// Builds a matrix from equal-length rows. `cols` is only consulted when
    /// `rows` is empty.
    pub fn from_rows(rows: Vec<Vec<T>>, cols: usize) -> Self {
        let cols = rows.first().map_or(cols, Vec::len);
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r);
        }
        Self::from_vec(n, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(hi * self.cols);
        head[lo * self.cols..(lo + 1) * self.cols].swap_with_slice(&mut tail[..self.cols]);
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix::from_vec(self.rows, self.cols, self.data.iter().map(f).collect())
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Self::from_vec(self.cols, self.rows, data)
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Self::from_vec(self.rows, cols, data)
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Self::from_vec(self.rows + other.rows, self.cols, data)
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            data.extend(cols.iter().map(|&j| self.get(i, j).clone()));
        }
        Self::from_vec(self.rows, cols.len(), data)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        Self::from_vec(rows.len(), self.cols, data)
    }

    /// Rows `r0..r1`, columns `c0..c1`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        let mut data = Vec::with_capacity((r1 - r0) * (c1 - c0));
        for i in r0..r1 {
            data.extend_from_slice(&self.row(i)[c0..c1]);
        }
        Self::from_vec(r1 - r0, c1 - c0, data)
    }
}

impl<T: Clone> Matrix<T> {
    pub fn zeros<F: Field<Elem = T>>(field: &F, rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, field.zero())
    }

    pub fn identity<F: Field<Elem = T>>(field: &F, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_i64_rows<F: Field<Elem = T>>(field: &F, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| field.from_i64(v)).collect())
                .collect(),
            cols,
        )
    }

    pub fn is_zero<F: Field<Elem = T>>(&self, field: &F) -> bool {
        self.data.iter().all(|v| field.is_zero(v))
    }

    pub fn mul<F: Field<Elem = T>>(&self, field: &F, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = Self::zeros(field, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if field.is_zero(a) {
                    continue;
                }
                for j in 0..rhs.cols {
                    let v = field.add(out.get(i, j), &field.mul(a, rhs.get(k, j)));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn add<F: Field<Elem = T>>(&self, field: &F, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self::from_vec(
            self.rows,
            self.cols,
            self.data.iter().zip(&rhs.data).map(|(a, b)| field.add(a, b)).collect(),
        )
    }
}

/// Row echelon form of `m` (row operations only) and its rank.
pub fn row_echelon<F: Field>(field: &F, m: &Matrix<F::Elem>) -> (Matrix<F::Elem>, usize) {
    let mut e = m.clone();
    let pivots = field.echelonize(&mut e);
    (e, pivots.len())
}

pub fn rank<F: Field>(field: &F, m: &Matrix<F::Elem>) -> usize {
    // Eliminating along the shorter side touches fewer entries.
    if m.rows() > m.cols() {
        row_echelon(field, &m.transpose()).1
    } else {
        row_echelon(field, m).1
    }
}

/// Reduced row echelon form and the pivot columns.
pub fn rref<F: Field>(field: &F, m: &Matrix<F::Elem>) -> (Matrix<F::Elem>, Vec<usize>) {
    let mut e = m.clone();
    let pivots = field.echelonize(&mut e);
    for &(r, c) in pivots.iter().rev() {
        let inv = field.inv(e.get(r, c)).expect("pivot is nonzero");
        for j in c..e.cols() {
            let v = field.mul(e.get(r, j), &inv);
            e.set(r, j, v);
        }
        for i in 0..r {
            let f = e.get(i, c).clone();
            if field.is_zero(&f) {
                continue;
            }
            for j in c..e.cols() {
                let v = field.sub(e.get(i, j), &field.mul(&f, e.get(r, j)));
                e.set(i, j, v);
            }
        }
    }
    (e, pivots.into_iter().map(|(_, c)| c).collect())
}

/// Basis of `{ y : y M = 0 }`, one vector per row.
///
/// Reduces `[M | I]` and returns the lower-right block of the rows whose left
/// part vanished.
pub fn left_kernel<F: Field>(field: &F, m: &Matrix<F::Elem>) -> Matrix<F::Elem> {
    let (n, c) = (m.rows(), m.cols());
    let mut aug = m.hstack(&Matrix::identity(field, n));
    let pivots = field.echelonize(&mut aug);
    let rank = pivots.iter().take_while(|&&(_, col)| col < c).count();
    aug.submatrix(rank, n, c, c + n)
}

/// Basis of `{ x : M x = 0 }`, one vector per column.
pub fn right_kernel<F: Field>(field: &F, m: &Matrix<F::Elem>) -> Matrix<F::Elem> {
    left_kernel(field, &m.transpose()).transpose()
}

/// Fraction-free (Bareiss) elimination over the integers, in place.
///
/// After step `k` every entry below the pivot rows is a `(k+1)`-minor of the
/// input, so each division is exact and entries never grow beyond the
/// Hadamard bound. Returns the pivot positions.
pub fn bareiss_echelon(m: &mut Matrix<BigInt>) -> Vec<(usize, usize)> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(p) = (row..rows).find(|&i| !m.get(i, col).is_zero()) else {
            continue;
        };
        m.swap_rows(row, p);
        let pivot = m.get(row, col).clone();
        let pivot_row: Vec<BigInt> = m.row(row)[col + 1..].to_vec();
        for i in row + 1..rows {
            let lead = std::mem::take(&mut m.as_mut_slice()[i * cols + col]);
            let target = &mut m.as_mut_slice()[i * cols + col + 1..(i + 1) * cols];
            if lead.is_zero() {
                if !prev.is_one() || !pivot.is_one() {
                    for t in target.iter_mut() {
                        if !t.is_zero() {
                            *t = &*t * &pivot / &prev;
                        }
                    }
                }
            } else {
                for (t, s) in target.iter_mut().zip(&pivot_row) {
                    let v = &*t * &pivot - &lead * s;
                    *t = if prev.is_one() { v } else { v / &prev };
                }
            }
        }
        prev = pivot;
        pivots.push((row, col));
        row += 1;
    }
    pivots
}

/// Rank over the rationals of an integer matrix, by Bareiss elimination.
pub fn bareiss_rank(m: &Matrix<BigInt>) -> usize {
    let mut work = m.clone();
    bareiss_echelon(&mut work).len()
}
