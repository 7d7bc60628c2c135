//! Compressed-row operator storage for the structured lattice operators.
//!
//! Every builder in this crate produces a few nonzeros per row, so products
//! against dense matrices and probe blocks go through this type. Rows are
//! accumulated in ascending column order; that fixed order keeps every
//! product bitwise reproducible.

use faer::MatRef;

use super::{Matrix, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    /// Duplicate coordinates are summed in insertion order; exact zeros are dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(triplets.len());
        for (i, j, v) in triplets {
            assert!(i < dim && j < dim, "triplet ({i}, {j}) outside dimension {dim}");
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|t| t.2 != C64::new(0.0, 0.0));
        let mut row_ptr = vec![0usize; dim + 1];
        for &(i, _, _) in &merged {
            row_ptr[i + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let cols = merged.iter().map(|t| t.1).collect();
        let vals = merged.iter().map(|t| t.2).collect();
        Self { dim, row_ptr, cols, vals }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let t = values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, i, C64::new(v, 0.0)))
            .collect();
        Self::from_triplets(values.len(), t)
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_triplets(dim, Vec::new())
    }

    pub fn from_dense(m: MatRef<'_, C64>) -> Self {
        let n = m.nrows();
        let mut t = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..n {
                let v = m[(i, j)];
                if v != C64::new(0.0, 0.0) {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(n, t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).fold(0.0, |a, b| a + b).sqrt()
    }

    /// `||X - X^dagger||_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        self.iter()
            .map(|(i, j, v)| (v - self.get(j, i).conj()).norm_sqr())
            .fold(0.0, |a, b| a + b)
            .sqrt()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(i, j, v)| (j, i, v.conj())).collect())
    }

    /// `a X + b Y`.
    pub fn lin_comb(a: C64, x: &Self, b: C64, y: &Self) -> Self {
        assert_eq!(x.dim, y.dim);
        let mut t: Vec<_> = x.iter().map(|(i, j, v)| (i, j, a * v)).collect();
        t.extend(y.iter().map(|(i, j, v)| (i, j, b * v)));
        Self::from_triplets(x.dim, t)
    }

    /// `self * other`, both sparse.
    pub fn mul_sparse(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut acc = vec![C64::new(0.0, 0.0); self.dim];
        let mut touched = vec![false; self.dim];
        let mut cols: Vec<usize> = Vec::new();
        let mut t = Vec::new();
        for i in 0..self.dim {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !touched[j] {
                        touched[j] = true;
                        cols.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            cols.sort_unstable();
            for &j in &cols {
                t.push((i, j, acc[j]));
                acc[j] = C64::new(0.0, 0.0);
                touched[j] = false;
            }
            cols.clear();
        }
        Self::from_triplets(self.dim, t)
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Self {
        let one = C64::new(1.0, 0.0);
        Self::lin_comb(one, &self.mul_sparse(other), -one, &other.mul_sparse(self))
    }

    /// `self * d - d * self` for a real diagonal `d`.
    pub fn commutator_diagonal(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.dim);
        Self::from_triplets(self.dim, self.iter().map(|(i, j, v)| (i, j, v * (d[j] - d[i]))).collect())
    }

    pub fn scale(&self, a: C64) -> Self {
        Self { vals: self.vals.iter().map(|v| a * v).collect(), ..self.clone() }
    }

    pub fn is_diagonal(&self) -> bool {
        self.iter().all(|(i, j, _)| i == j)
    }

    /// Diagonal entries (real parts).
    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).fold(C64::new(0.0, 0.0), |acc, (j, v)| acc + v * x[j]))
            .collect()
    }

    /// `self * x` for a dense block `x` (dim x m).
    pub fn mul_mat(&self, x: MatRef<'_, C64>) -> Matrix {
        assert_eq!(x.nrows(), self.dim);
        let mut out = Matrix::zeros(self.dim, x.ncols());
        for c in 0..x.ncols() {
            let col = x.col(c);
            let dst = out.col_as_slice_mut(c);
            for (i, d) in dst.iter_mut().enumerate() {
                *d = self.row(i).fold(C64::new(0.0, 0.0), |acc, (j, v)| acc + v * col[j]);
            }
        }
        out
    }

    /// `x * self` for a dense `x` (m x dim).
    pub fn left_mul_mat(&self, x: MatRef<'_, C64>) -> Matrix {
        assert_eq!(x.ncols(), self.dim);
        let mut out = Matrix::zeros(x.nrows(), self.dim);
        for k in 0..self.dim {
            let src = x.col(k);
            for (j, v) in self.row(k) {
                let dst = out.col_as_slice_mut(j);
                for (r, d) in dst.iter_mut().enumerate() {
                    *d += src[r] * v;
                }
            }
        }
        out
    }
}

/// Anything that can act on a block of column vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply_mat(&self, x: MatRef<'_, C64>) -> Matrix;
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_mat(&self, x: MatRef<'_, C64>) -> Matrix {
        self.mul_mat(x)
    }
}
