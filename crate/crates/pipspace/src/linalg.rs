//! Exact linear algebra over the rationals.
//!
//! Two independent elimination routes are kept deliberately separate:
//! [`RatMatrix::rank`] row-reduces over `BigRational`, while
//! [`rank_bareiss`] runs fraction-free Bareiss elimination over `BigInt`
//! after clearing denominators row by row. Rank consumers cross-check one
//! against the other.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Zero};

use crate::scalar::{cabs2, conj, czero, CRat};

/// Dense matrix of exact rationals, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        RatMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigRational) {
        self.data[r * self.cols + c] = v;
    }

    /// Columns of `other` appended to the right of `self`.
    pub fn hstack(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.rows, other.rows, "row mismatch in hstack");
        let mut out = RatMatrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).clone());
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c).clone());
            }
        }
        out
    }

    pub fn column(&self, c: usize) -> Vec<BigRational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc = BigRational::zero();
                for k in 0..self.cols {
                    let a = self.get(r, k);
                    let b = other.get(k, c);
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                out.set(r, c, acc);
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|r| {
                let mut acc = BigRational::zero();
                for c in 0..self.cols {
                    let a = self.get(r, c);
                    if !a.is_zero() && !v[c].is_zero() {
                        acc += a * &v[c];
                    }
                }
                acc
            })
            .collect()
    }

    /// In-place reduction to row echelon form; returns pivot columns.
    fn echelon(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            if p != row {
                for c in 0..self.cols {
                    self.data.swap(p * self.cols + c, row * self.cols + c);
                }
            }
            let inv = self.get(row, col).recip();
            for c in col..self.cols {
                let v = self.get(row, c) * &inv;
                self.set(row, c, v);
            }
            for r in 0..self.rows {
                if r != row && !self.get(r, col).is_zero() {
                    let factor = self.get(r, col).clone();
                    for c in col..self.cols {
                        let v = self.get(r, c) - &factor * self.get(row, c);
                        self.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    /// Rank by rational Gaussian row reduction.
    pub fn rank(&self) -> usize {
        self.clone().echelon().len()
    }

    /// Basis of the right kernel {x : Ax = 0}.
    pub fn kernel_basis(&self) -> Vec<Vec<BigRational>> {
        let mut m = self.clone();
        let pivots = m.echelon();
        let pivot_set: Vec<Option<usize>> = {
            let mut ps = vec![None; self.cols];
            for (i, &c) in pivots.iter().enumerate() {
                ps[c] = Some(i);
            }
            ps
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free].is_some() {
                continue;
            }
            let mut v = vec![BigRational::zero(); self.cols];
            v[free] = BigRational::one();
            for (prow, &pc) in pivots.iter().enumerate() {
                v[pc] = -m.get(prow, free).clone();
            }
            basis.push(v);
        }
        basis
    }

    /// One solution of Ax = b (free variables set to zero), or `None`
    /// when the system is inconsistent.
    pub fn solve(&self, b: &[BigRational]) -> Option<Vec<BigRational>> {
        assert_eq!(b.len(), self.rows, "dimension mismatch");
        let mut aug = self.hstack(&RatMatrix {
            rows: self.rows,
            cols: 1,
            data: b.to_vec(),
        });
        let pivots = aug.echelon();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![BigRational::zero(); self.cols];
        for (row, &col) in pivots.iter().enumerate() {
            x[col] = aug.get(row, self.cols).clone();
        }
        Some(x)
    }
}

/// Rank by fraction-free Bareiss elimination over the integers.
///
/// Denominators are cleared per row first (rank-preserving). This is the
/// second elimination route used to cross-check [`RatMatrix::rank`].
pub fn rank_bareiss(m: &RatMatrix) -> usize {
    let rows = m.rows();
    let cols = m.cols();
    if rows == 0 || cols == 0 {
        return 0;
    }
    let mut a: Vec<Vec<BigInt>> = (0..rows)
        .map(|r| {
            let lcm = (0..cols).fold(BigInt::one(), |acc, c| acc.lcm(m.get(r, c).denom()));
            (0..cols)
                .map(|c| {
                    let q = m.get(r, c);
                    q.numer() * (&lcm / q.denom())
                })
                .collect()
        })
        .collect();

    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for r in rank + 1..rows {
            for c in col + 1..cols {
                let num = &a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c];
                a[r][c] = num / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Sparse integer matrix stored by column. Coboundary, homotopy, and
/// refinement cochain maps all have entries in {0, ±1}, and their law
/// checks only ever produce small integer sums, so i64 arithmetic is
/// exact here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseIntMatrix {
    rows: usize,
    cols: usize,
    // per column: sorted (row, value) with value != 0
    entries: Vec<Vec<(usize, i64)>>,
}

impl SparseIntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseIntMatrix {
            rows,
            cols,
            entries: vec![Vec::new(); cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for c in 0..n {
            m.entries[c].push((c, 1));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn add_entry(&mut self, r: usize, c: usize, v: i64) {
        assert!(r < self.rows && c < self.cols, "entry out of bounds");
        if v == 0 {
            return;
        }
        let col = &mut self.entries[c];
        match col.binary_search_by_key(&r, |e| e.0) {
            Ok(i) => {
                col[i].1 += v;
                if col[i].1 == 0 {
                    col.remove(i);
                }
            }
            Err(i) => col.insert(i, (r, v)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Vec::is_empty)
    }

    /// Exact application to an integer vector; entries here are {0,±1}
    /// with bounded row sums, so i64 never overflows at these sizes.
    pub fn apply_i64(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        let mut out = vec![0i64; self.rows];
        for (c, col) in self.entries.iter().enumerate() {
            if v[c] == 0 {
                continue;
            }
            for &(r, val) in col {
                out[r] += v[c] * val;
            }
        }
        out
    }

    pub fn apply_rat(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        let mut out = vec![BigRational::zero(); self.rows];
        for (c, col) in self.entries.iter().enumerate() {
            if v[c].is_zero() {
                continue;
            }
            for &(r, val) in col {
                out[r] += &v[c] * BigRational::from_integer(BigInt::from(val));
            }
        }
        out
    }

    /// self ∘ other, i.e. the map x ↦ self(other(x)).
    pub fn compose(&self, other: &SparseIntMatrix) -> SparseIntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in compose");
        let mut out = SparseIntMatrix::zeros(self.rows, other.cols);
        for (c, col) in other.entries.iter().enumerate() {
            for &(mid, v1) in col {
                for &(r, v2) in &self.entries[mid] {
                    out.add_entry(r, c, v1 * v2);
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &SparseIntMatrix) -> SparseIntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (c, col) in other.entries.iter().enumerate() {
            for &(r, v) in col {
                out.add_entry(r, c, -v);
            }
        }
        out
    }

    pub fn add(&self, other: &SparseIntMatrix) -> SparseIntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (c, col) in other.entries.iter().enumerate() {
            for &(r, v) in col {
                out.add_entry(r, c, v);
            }
        }
        out
    }

    pub fn to_rat_matrix(&self) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.rows, self.cols);
        for (c, col) in self.entries.iter().enumerate() {
            for &(r, v) in col {
                m.set(r, c, BigRational::from_integer(BigInt::from(v)));
            }
        }
        m
    }
}

/// Small dense matrix of complex rationals (operator finite blocks).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<CRat>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        CMatrix {
            dim,
            data: vec![czero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, crate::scalar::cone());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<CRat>>) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        CMatrix {
            dim: n,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> &CRat {
        &self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: CRat) {
        self.data[r * self.dim + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re.is_zero() && z.im.is_zero())
    }

    /// Smallest leading square block outside which all entries vanish.
    pub fn trimmed_dim(&self) -> usize {
        (0..self.dim)
            .rev()
            .find(|&i| {
                (0..self.dim).any(|j| {
                    let a = self.get(i, j);
                    let b = self.get(j, i);
                    !(a.re.is_zero() && a.im.is_zero()) || !(b.re.is_zero() && b.im.is_zero())
                })
            })
            .map_or(0, |i| i + 1)
    }

    /// Copy into a dim×dim block, padding with zeros. Panics if entries
    /// would be lost.
    pub fn embedded(&self, dim: usize) -> CMatrix {
        assert!(dim >= self.trimmed_dim(), "embedding would truncate");
        let mut out = CMatrix::zeros(dim);
        let n = self.dim.min(dim);
        for r in 0..n {
            for c in 0..n {
                out.set(r, c, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn trimmed(&self) -> CMatrix {
        self.embedded(self.trimmed_dim())
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        let n = self.dim.max(other.dim);
        let (a, b) = (self.embedded(n), other.embedded(n));
        let mut out = CMatrix::zeros(n);
        for i in 0..n * n {
            out.data[i] = a.data[i].clone() + b.data[i].clone();
        }
        out
    }

    pub fn scale(&self, s: &CRat) -> CMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = v.clone() * s.clone();
        }
        out
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        let n = self.dim.max(other.dim);
        let (a, b) = (self.embedded(n), other.embedded(n));
        let mut out = CMatrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                let mut acc = czero();
                for k in 0..n {
                    let x = a.get(r, k);
                    let y = b.get(k, c);
                    if !(x.re.is_zero() && x.im.is_zero()) && !(y.re.is_zero() && y.im.is_zero()) {
                        acc += x.clone() * y.clone();
                    }
                }
                out.set(r, c, acc);
            }
        }
        out
    }

    pub fn conj_transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.set(c, r, conj(self.get(r, c)));
            }
        }
        out
    }

    /// Exact inverse by Gauss-Jordan, or `None` when singular.
    pub fn inverse(&self) -> Option<CMatrix> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = CMatrix::identity(n);
        for col in 0..n {
            let p = (col..n).find(|&r| !cabs2(a.get(r, col)).is_zero())?;
            if p != col {
                for c in 0..n {
                    a.data.swap(p * n + c, col * n + c);
                    inv.data.swap(p * n + c, col * n + c);
                }
            }
            let pivot_inv = cone_div(a.get(col, col));
            for c in 0..n {
                let v = a.get(col, c).clone() * pivot_inv.clone();
                a.set(col, c, v);
                let v = inv.get(col, c).clone() * pivot_inv.clone();
                inv.set(col, c, v);
            }
            for r in 0..n {
                if r != col && !cabs2(a.get(r, col)).is_zero() {
                    let factor = a.get(r, col).clone();
                    for c in 0..n {
                        let v = a.get(r, c).clone() - factor.clone() * a.get(col, c).clone();
                        a.set(r, c, v);
                        let v = inv.get(r, c).clone() - factor.clone() * inv.get(col, c).clone();
                        inv.set(r, c, v);
                    }
                }
            }
        }
        Some(inv)
    }

    pub fn is_invertible(&self) -> bool {
        if self.dim == 0 {
            return true;
        }
        self.inverse().is_some()
    }
}

fn cone_div(z: &CRat) -> CRat {
    crate::scalar::cone() / z.clone()
}
