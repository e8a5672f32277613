//! Compressed sparse row storage for complex superoperators.
//!
//! Every Liouvillian, SU(4) generator and dissipator in this crate is a
//! [`SparseSuperoperator`] acting on vectorized-state coordinates. The type is
//! deliberately small: assembly from triplets, linear combinations, sparse
//! products, matrix-vector application and a few norms.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Row count above which matrix-vector products are split across threads.
const PAR_ROWS: usize = 1 << 14;

/// A square sparse complex matrix in CSR form.
///
/// Column indices are sorted within each row and contain no duplicates.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSuperoperator {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl SparseSuperoperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, indptr: vec![0; dim + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diagonal(&vec![C64::new(1.0, 0.0); dim])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let dim = diag.len();
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::with_capacity(dim);
        let mut values = Vec::with_capacity(dim);
        indptr.push(0);
        for (i, &d) in diag.iter().enumerate() {
            if d != C64::new(0.0, 0.0) {
                indices.push(i);
                values.push(d);
            }
            indptr.push(indices.len());
        }
        Self { dim, indptr, indices, values }
    }

    /// Assembles a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= dim || *c >= dim) {
            return Err(Error::Parameter(format!(
                "triplet ({r}, {c}) out of range for dimension {dim}"
            )));
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        Ok(Self { dim, indptr, indices, values }.pruned(0.0))
    }

    /// Converts a dense matrix, dropping entries with modulus `<= tol`.
    pub fn from_dense(m: &DMatrix<C64>, tol: f64) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "superoperators are square");
        let dim = m.nrows();
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..dim {
            for c in 0..dim {
                let v = m[(r, c)];
                if v.norm() > tol {
                    indices.push(c);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self { dim, indptr, indices, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `r` as `(col, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    /// All stored entries as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = self.indptr[r]..self.indptr[r + 1];
        match self.indices[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// Diagonal entries.
    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(r, c, _)| r == c)
    }

    /// `y = self * x`.
    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = self * x`, writing into a caller-provided buffer.
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: x.len() });
        }
        if y.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: y.len() });
        }
        let row_dot = |r: usize| -> C64 {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            acc
        };
        if self.dim >= PAR_ROWS {
            y.par_iter_mut().enumerate().for_each(|(r, yr)| *yr = row_dot(r));
        } else {
            for (r, yr) in y.iter_mut().enumerate() {
                *yr = row_dot(r);
            }
        }
        Ok(())
    }

    /// Row-vector product `c * self` (a covector pulled back through the operator).
    pub fn apply_left(&self, c: &[C64]) -> Result<Vec<C64>> {
        if c.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: c.len() });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for (r, &cr) in c.iter().enumerate() {
            if cr == C64::new(0.0, 0.0) {
                continue;
            }
            for k in self.indptr[r]..self.indptr[r + 1] {
                out[self.indices[k]] += cr * self.values[k];
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.pruned(0.0)
    }

    pub fn scaled_re(&self, s: f64) -> Self {
        self.scaled(C64::new(s, 0.0))
    }

    /// `Σ_k c_k · ops_k`.
    pub fn linear_combination(terms: &[(C64, &SparseSuperoperator)]) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::Parameter("empty linear combination".into()));
        };
        let dim = first.dim;
        if let Some((_, bad)) = terms.iter().find(|(_, op)| op.dim != dim) {
            return Err(Error::Dimension { expected: dim, got: bad.dim });
        }
        let mut acc = vec![C64::new(0.0, 0.0); dim];
        let mut mark = vec![usize::MAX; dim];
        let mut cols: Vec<usize> = Vec::new();
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..dim {
            cols.clear();
            for (coef, op) in terms {
                for (c, v) in op.row(r) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = C64::new(0.0, 0.0);
                        cols.push(c);
                    }
                    acc[c] += coef * v;
                }
            }
            cols.sort_unstable();
            for &c in &cols {
                if acc[c] != C64::new(0.0, 0.0) {
                    indices.push(c);
                    values.push(acc[c]);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self { dim, indptr, indices, values })
    }

    /// Sparse product `self * rhs` (Gustavson's row-by-row algorithm).
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::Dimension { expected: self.dim, got: rhs.dim });
        }
        let dim = self.dim;
        let mut acc = vec![C64::new(0.0, 0.0); dim];
        let mut mark = vec![usize::MAX; dim];
        let mut cols: Vec<usize> = Vec::new();
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..dim {
            cols.clear();
            for (k, a) in self.row(r) {
                for (c, b) in rhs.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = C64::new(0.0, 0.0);
                        cols.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            cols.sort_unstable();
            for &c in &cols {
                if acc[c] != C64::new(0.0, 0.0) {
                    indices.push(c);
                    values.push(acc[c]);
                }
            }
            indptr.push(indices.len());
        }
        Ok(Self { dim, indptr, indices, values })
    }

    /// `[self, rhs] = self·rhs − rhs·self`.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        let ab = self.matmul(rhs)?;
        let ba = rhs.matmul(self)?;
        Ok(&ab - &ba)
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.dim + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.dim {
            counts[i + 1] += counts[i];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![C64::new(0.0, 0.0); self.nnz()];
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                let slot = next[c];
                indices[slot] = r;
                values[slot] = v;
                next[c] += 1;
            }
        }
        Self { dim: self.dim, indptr, indices, values }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut t = self.transpose();
        t.values.iter_mut().for_each(|v| *v = v.conj());
        t
    }

    /// Drops stored entries with modulus `<= tol`.
    pub fn pruned(mut self, tol: f64) -> Self {
        let mut indptr = Vec::with_capacity(self.dim + 1);
        indptr.push(0);
        let mut w = 0;
        for r in 0..self.dim {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k].norm() > tol {
                    self.indices[w] = self.indices[k];
                    self.values[w] = self.values[k];
                    w += 1;
                }
            }
            indptr.push(w);
        }
        self.indices.truncate(w);
        self.values.truncate(w);
        self.indptr = indptr;
        self
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::Dimension { expected: self.dim, got: other.dim });
        }
        Ok((self - other).max_abs())
    }

    /// Induced 1-norm (largest absolute column sum).
    pub fn one_norm(&self) -> f64 {
        let mut cols = vec![0.0f64; self.dim];
        for (&c, v) in self.indices.iter().zip(&self.values) {
            cols[c] += v.norm();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    /// Kronecker product `self ⊗ small` with a dense (typically tiny) factor.
    pub fn kron_dense(&self, small: &DMatrix<C64>) -> Self {
        assert_eq!(small.nrows(), small.ncols());
        let d = small.nrows();
        let dim = self.dim * d;
        let small_nz: Vec<Vec<(usize, C64)>> = (0..d)
            .map(|i| (0..d).filter(|&j| small[(i, j)].norm() > 0.0).map(|j| (j, small[(i, j)])).collect())
            .collect();
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for r in 0..self.dim {
            for row_nz in &small_nz {
                for (c, v) in self.row(r) {
                    for &(j, s) in row_nz {
                        indices.push(c * d + j);
                        values.push(v * s);
                    }
                }
                indptr.push(indices.len());
            }
        }
        Self { dim, indptr, indices, values }
    }

    /// `W · self · W⁻¹` for `W = diag(w)`.
    pub fn diagonal_similarity(&self, w: &[f64]) -> Result<Self> {
        if w.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: w.len() });
        }
        let mut out = self.clone();
        for r in 0..self.dim {
            for k in self.indptr[r]..self.indptr[r + 1] {
                out.values[k] *= w[r] / w[self.indices[k]];
            }
        }
        Ok(out)
    }

    /// Principal submatrix over the given coordinates (in the given order).
    pub fn restrict(&self, coords: &[usize]) -> Self {
        let mut local = vec![usize::MAX; self.dim];
        for (k, &c) in coords.iter().enumerate() {
            local[c] = k;
        }
        let mut indptr = Vec::with_capacity(coords.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut row: Vec<(usize, C64)> = Vec::new();
        indptr.push(0);
        for &g in coords {
            row.clear();
            row.extend(self.row(g).filter(|(c, _)| local[*c] != usize::MAX).map(|(c, v)| (local[c], v)));
            row.sort_unstable_by_key(|e| e.0);
            for &(c, v) in &row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self { dim: coords.len(), indptr, indices, values }
    }

    /// Coordinates reachable from `seeds` by repeated application.
    ///
    /// The returned set (sorted) spans the smallest coordinate subspace that
    /// contains the seeds and is invariant under the operator.
    pub fn reachable_from(&self, seeds: &[usize]) -> Vec<usize> {
        let t = self.transpose();
        let mut seen = vec![false; self.dim];
        let mut stack: Vec<usize> = Vec::new();
        for &s in seeds {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
        // Column j of `self` is row j of the transpose: targets of coordinate j.
        while let Some(j) = stack.pop() {
            for (i, _) in t.row(j) {
                if !seen[i] {
                    seen[i] = true;
                    stack.push(i);
                }
            }
        }
        (0..self.dim).filter(|&i| seen[i]).collect()
    }
}

impl Add for &SparseSuperoperator {
    type Output = SparseSuperoperator;
    fn add(self, rhs: Self) -> SparseSuperoperator {
        let one = C64::new(1.0, 0.0);
        SparseSuperoperator::linear_combination(&[(one, self), (one, rhs)])
            .expect("dimension mismatch in sparse addition")
    }
}

impl Sub for &SparseSuperoperator {
    type Output = SparseSuperoperator;
    fn sub(self, rhs: Self) -> SparseSuperoperator {
        SparseSuperoperator::linear_combination(&[(C64::new(1.0, 0.0), self), (C64::new(-1.0, 0.0), rhs)])
            .expect("dimension mismatch in sparse subtraction")
    }
}

impl Mul for &SparseSuperoperator {
    type Output = SparseSuperoperator;
    fn mul(self, rhs: Self) -> SparseSuperoperator {
        self.matmul(rhs).expect("dimension mismatch in sparse product")
    }
}

impl Mul<&SparseSuperoperator> for f64 {
    type Output = SparseSuperoperator;
    fn mul(self, rhs: &SparseSuperoperator) -> SparseSuperoperator {
        rhs.scaled_re(self)
    }
}

impl Mul<&SparseSuperoperator> for C64 {
    type Output = SparseSuperoperator;
    fn mul(self, rhs: &SparseSuperoperator) -> SparseSuperoperator {
        rhs.scaled(self)
    }
}

impl Neg for &SparseSuperoperator {
    type Output = SparseSuperoperator;
    fn neg(self) -> SparseSuperoperator {
        self.scaled_re(-1.0)
    }
}

/// Plain complex dot product without conjugation (covector application).
pub fn pair(covector: &[C64], state: &[C64]) -> C64 {
    covector.iter().zip(state).map(|(a, b)| a * b).sum()
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
