//! Dense Hermitian operators on the sector basis.
//!
//! The builders assemble `H0`, `H_int`, `P` and `N0` as sparse triplets and
//! densify on request. Dense products go through faer with sequential
//! parallelism; sparse-times-dense products accumulate row by row in
//! ascending column order. Both orders are fixed, so every result is bitwise
//! reproducible for a given build.

mod blocks;
mod builders;
mod sparse;
mod spectral;

use faer::linalg::matmul::matmul;
use faer::{Accum, MatRef, Par};

pub use blocks::{BlockSpectrum, MomentumBlocks, OperatorBlock, OverlapSpectrum};
pub use builders::{
    build_free_boost, build_free_hamiltonian, build_hamiltonian, build_interaction,
    build_momentum, free_boost_sparse, free_energy, free_hamiltonian_sparse, interaction_sparse,
    momentum_sparse, InteractionKernel,
};
pub use sparse::{LinearOperator, SparseOperator};
pub use spectral::{
    conjugate_by_boost, evolve, spectral, spectral_unsplit, BoostConjugator, SpectralDecomposition,
};

use crate::error::{LabError, Result};

pub type C64 = num_complex::Complex64;
pub type Matrix = faer::Mat<C64>;

/// Relative Hermiticity defect below which input counts as exactly Hermitian.
pub const HERMITIAN_EXACT: f64 = 1e-12;
/// Relative Hermiticity defect above which construction is rejected.
pub const HERMITIAN_ABORT: f64 = 1e-8;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Dense Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: Matrix,
}

impl HermitianOperator {
    /// Symmetrizes `(X + X^dagger) / 2`. A relative defect above
    /// [`HERMITIAN_EXACT`] is logged; above [`HERMITIAN_ABORT`] it is an error.
    pub fn new(mat: Matrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(LabError::DimensionMismatch { expected: mat.nrows(), found: mat.ncols() });
        }
        let n = mat.nrows();
        let mut defect = 0.0;
        for j in 0..n {
            for i in 0..=j {
                defect += (mat[(i, j)] - mat[(j, i)].conj()).norm_sqr() * if i == j { 1.0 } else { 2.0 };
            }
        }
        let rel = defect.sqrt() / frobenius(mat.as_ref()).max(1.0);
        if rel > HERMITIAN_ABORT {
            return Err(LabError::Numeric(format!(
                "operator is not Hermitian: relative defect {rel:.3e} exceeds {HERMITIAN_ABORT:e}"
            )));
        }
        if rel > HERMITIAN_EXACT {
            log::warn!("symmetrized operator with relative Hermiticity defect {rel:.3e}");
        }
        let sym = Matrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(mat[(i, i)].re, 0.0)
            } else {
                (mat[(i, j)] + mat[(j, i)].conj()) * 0.5
            }
        });
        Ok(Self { mat: sym })
    }

    pub fn from_sparse(s: &SparseOperator) -> Result<Self> {
        Self::new(s.to_dense())
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            mat: Matrix::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { ZERO }),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: Matrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, C64> {
        self.mat.as_ref()
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(self.mat.as_ref())
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| i == j || self.mat[(i, j)] == ZERO))
    }

    pub fn to_sparse(&self) -> SparseOperator {
        SparseOperator::from_dense(self.mat.as_ref())
    }

    /// Real linear combination `a X + b Y`.
    pub fn lin_comb(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self> {
        check_dims(x.dim(), y.dim())?;
        let n = x.dim();
        Ok(Self { mat: Matrix::from_fn(n, n, |i, j| x.mat[(i, j)] * a + y.mat[(i, j)] * b) })
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        check_dims(self.dim(), psi.len())?;
        let x = column(psi.amplitudes());
        let y = mat_mul(self.matrix(), x.as_ref());
        Ok(StateVector::new(y.col_as_slice(0).to_vec()))
    }

    /// `<psi| X |psi>`.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        let xpsi = self.apply(psi)?;
        Ok(psi.inner(&xpsi)?.re)
    }

    /// Nonzero entries `(row, col, value)` with `|value| > threshold`, column-major order.
    pub fn nonzero_entries(&self, threshold: f64) -> Vec<(usize, usize, C64)> {
        let n = self.dim();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = self.mat[(i, j)];
                if v.norm() > threshold {
                    out.push((i, j, v));
                }
            }
        }
        out
    }
}

impl LinearOperator for HermitianOperator {
    fn dim(&self) -> usize {
        self.mat.nrows()
    }

    fn apply_mat(&self, x: MatRef<'_, C64>) -> Matrix {
        mat_mul(self.matrix(), x)
    }
}

/// Complex amplitude vector over the sector basis with a cached norm.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    norm: f64,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        let norm = l2(&amplitudes);
        Self { amplitudes, norm }
    }

    /// Scaled to unit norm; a zero vector is an error.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let n = l2(&amplitudes);
        if !(n > 0.0) {
            return Err(LabError::Numeric("cannot normalize a zero state".into()));
        }
        Ok(Self::new(amplitudes.into_iter().map(|a| a / n).collect()))
    }

    pub fn basis_vector(dim: usize, index: usize) -> Self {
        let mut a = vec![ZERO; dim];
        a[index] = ONE;
        Self { amplitudes: a, norm: 1.0 }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `<self, other>`, antilinear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dims(self.len(), other.len())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(ZERO, |acc, (a, b)| acc + a.conj() * b))
    }

    /// `a * self + b * other`.
    pub fn superpose(a: C64, x: &StateVector, b: C64, y: &StateVector) -> Result<StateVector> {
        check_dims(x.len(), y.len())?;
        Ok(StateVector::new(
            x.amplitudes.iter().zip(&y.amplitudes).map(|(p, q)| a * p + b * q).collect(),
        ))
    }
}

/// `X Y - Y X` for two Hermitian operators (anti-Hermitian in general).
pub fn commutator(x: &HermitianOperator, y: &HermitianOperator) -> Result<Matrix> {
    commutator_mat(x.matrix(), y.matrix())
}

/// Commutator of two general square matrices.
///
/// When one operand is sparse (at most one eighth nonzero) the products go
/// through [`SparseOperator`]; a diagonal operand commutes entrywise.
pub fn commutator_mat(x: MatRef<'_, C64>, y: MatRef<'_, C64>) -> Result<Matrix> {
    check_dims(x.nrows(), y.nrows())?;
    check_dims(x.nrows(), x.ncols())?;
    check_dims(y.nrows(), y.ncols())?;
    let n = x.nrows();
    if let Some(d) = diagonal_of(y) {
        return Ok(Matrix::from_fn(n, n, |i, j| x[(i, j)] * (d[j] - d[i])));
    }
    if let Some(d) = diagonal_of(x) {
        return Ok(Matrix::from_fn(n, n, |i, j| y[(i, j)] * (d[i] - d[j])));
    }
    let sparse_limit = n * n / 8;
    let ys = SparseOperator::from_dense(y);
    if ys.nnz() <= sparse_limit {
        let xy = ys.left_mul_mat(x);
        let yx = ys.mul_mat(x);
        return Ok(Matrix::from_fn(n, n, |i, j| xy[(i, j)] - yx[(i, j)]));
    }
    let xs = SparseOperator::from_dense(x);
    if xs.nnz() <= sparse_limit {
        let xy = xs.mul_mat(y);
        let yx = xs.left_mul_mat(y);
        return Ok(Matrix::from_fn(n, n, |i, j| xy[(i, j)] - yx[(i, j)]));
    }
    let xy = mat_mul(x, y);
    let yx = mat_mul(y, x);
    Ok(Matrix::from_fn(n, n, |i, j| xy[(i, j)] - yx[(i, j)]))
}

fn diagonal_of(m: MatRef<'_, C64>) -> Option<Vec<C64>> {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)] != ZERO {
                return None;
            }
        }
    }
    Some((0..n).map(|i| m[(i, i)]).collect())
}

/// Sequential dense product `a * b`.
pub fn mat_mul(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Matrix {
    let mut out = Matrix::zeros(a.nrows(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a, b, ONE, Par::Seq);
    out
}

/// Sequential dense product `a^dagger * b`.
pub fn adjoint_mul(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Matrix {
    let mut out = Matrix::zeros(a.ncols(), b.ncols());
    matmul(out.as_mut(), Accum::Replace, a.adjoint(), b, ONE, Par::Seq);
    out
}

pub fn frobenius(m: MatRef<'_, C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

/// `||a - b||_F`.
pub fn frobenius_distance(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += (a[(i, j)] - b[(i, j)]).norm_sqr();
        }
    }
    s.sqrt()
}

pub(crate) fn column(v: &[C64]) -> Matrix {
    Matrix::from_fn(v.len(), 1, |i, _| v[i])
}

pub(crate) fn l2(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).fold(0.0, |a, b| a + b).sqrt()
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(LabError::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn construction_symmetrizes_roundoff_and_rejects_bugs() {
        let mut m = Matrix::from_fn(2, 2, |i, j| if i == j { c(1.0, 0.0) } else { c(0.5, 0.0) });
        m[(0, 1)] = c(0.5 + 1e-10, 0.0);
        let h = HermitianOperator::new(m.clone()).unwrap();
        assert_eq!(h.get(0, 1), h.get(1, 0).conj());
        m[(0, 1)] = c(0.6, 0.0);
        assert!(matches!(HermitianOperator::new(m), Err(LabError::Numeric(_))));
        let rect = Matrix::zeros(2, 3);
        assert!(HermitianOperator::new(rect).is_err());
    }

    #[test]
    fn commutator_of_self_vanishes() {
        let m = Matrix::from_fn(3, 3, |i, j| c((i + j) as f64, i as f64 - j as f64));
        let h = HermitianOperator::new(m).unwrap();
        let k = commutator(&h, &h).unwrap();
        assert_eq!(frobenius(k.as_ref()), 0.0);
    }

    #[test]
    fn commutator_paths_agree() {
        let n = 24;
        let dense = Matrix::from_fn(n, n, |i, j| {
            let a = ((i * 7 + j * 3) % 11) as f64 - 5.0;
            let b = ((i * 5 + j * 13) % 7) as f64 - 3.0;
            if i == j { c(a, 0.0) } else if i < j { c(a, b) } else { c(((j * 7 + i * 3) % 11) as f64 - 5.0, -(((j * 5 + i * 13) % 7) as f64 - 3.0)) }
        });
        let x = HermitianOperator::new(dense).unwrap();
        let tri = SparseOperator::from_triplets(
            n,
            (0..n - 1)
                .flat_map(|i| [(i, i + 1, c(0.0, 1.0 + i as f64)), (i + 1, i, c(0.0, -1.0 - i as f64))])
                .collect(),
        );
        let y = HermitianOperator::from_sparse(&tri).unwrap();
        let fast = commutator(&x, &y).unwrap();
        let slow = {
            let xy = mat_mul(x.matrix(), y.matrix());
            let yx = mat_mul(y.matrix(), x.matrix());
            Matrix::from_fn(n, n, |i, j| xy[(i, j)] - yx[(i, j)])
        };
        assert!(frobenius_distance(fast.as_ref(), slow.as_ref()) < 1e-11);
        let d = HermitianOperator::diagonal(&(0..n).map(|i| i as f64).collect::<Vec<_>>());
        let fd = commutator(&x, &d).unwrap();
        let sd = {
            let xy = mat_mul(x.matrix(), d.matrix());
            let yx = mat_mul(d.matrix(), x.matrix());
            Matrix::from_fn(n, n, |i, j| xy[(i, j)] - yx[(i, j)])
        };
        assert!(frobenius_distance(fd.as_ref(), sd.as_ref()) < 1e-12);
    }

    #[test]
    fn commutator_dimension_mismatch() {
        let a = HermitianOperator::zeros(2);
        let b = HermitianOperator::zeros(3);
        assert!(matches!(commutator(&a, &b), Err(LabError::DimensionMismatch { .. })));
    }

    #[test]
    fn state_norm_cached() {
        let s = StateVector::new(vec![c(3.0, 0.0), c(0.0, 4.0)]);
        assert_eq!(s.norm(), 5.0);
        let u = StateVector::normalized(s.amplitudes().to_vec()).unwrap();
        assert!((u.norm() - 1.0).abs() < 1e-15);
        assert!((u.norm() - l2(u.amplitudes())).abs() <= 1e-12);
        assert!(StateVector::normalized(vec![ZERO; 3]).is_err());
    }
}
