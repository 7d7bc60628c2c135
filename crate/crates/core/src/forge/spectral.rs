//! Eigendecomposition, unitary evolution and boost conjugation.
//!
//! [`spectral`] first splits the nonzero pattern into connected components
//! and diagonalizes each one separately; momentum-conserving operators fall
//! apart into their total-momentum blocks this way. Eigenpairs are merged in
//! ascending eigenvalue order, ties broken by (component, local index).

use faer::{MatRef, Side};

use super::{adjoint_mul, check_dims, column, mat_mul, HermitianOperator, Matrix, StateVector, C64, ZERO};
use crate::error::{LabError, Result};

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Matrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> MatRef<'_, C64> {
        self.eigenvectors.as_ref()
    }

    /// `U diag(lambda) U^dagger`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        let u = &self.eigenvectors;
        let scaled = Matrix::from_fn(n, n, |i, j| u[(i, j)] * self.eigenvalues[j]);
        let mut out = Matrix::zeros(n, n);
        faer::linalg::matmul::matmul(
            out.as_mut(),
            faer::Accum::Replace,
            scaled.as_ref(),
            u.adjoint(),
            super::ONE,
            faer::Par::Seq,
        );
        out
    }

    /// `||U diag(lambda) U^dagger - X||_F / ||X||_F` (absolute when `X = 0`).
    pub fn reconstruction_error(&self, x: &HermitianOperator) -> f64 {
        let r = self.reconstruct();
        let scale = match x.frobenius_norm() {
            s if s > 0.0 => s,
            _ => 1.0,
        };
        super::frobenius_distance(r.as_ref(), x.matrix()) / scale
    }

    /// `||U^dagger U - I||_F`.
    pub fn unitarity_error(&self) -> f64 {
        let g = adjoint_mul(self.eigenvectors(), self.eigenvectors());
        let n = self.dim();
        let mut s = 0.0;
        for j in 0..n {
            for i in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                s += (g[(i, j)] - C64::new(want, 0.0)).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// Coefficients `U^dagger psi`.
    pub fn to_eigenbasis(&self, psi: &[C64]) -> Vec<C64> {
        adjoint_mul(self.eigenvectors(), column(psi).as_ref()).col_as_slice(0).to_vec()
    }

    /// `U c`.
    pub fn from_eigenbasis(&self, c: &[C64]) -> Vec<C64> {
        mat_mul(self.eigenvectors(), column(c).as_ref()).col_as_slice(0).to_vec()
    }

    /// `U f(Lambda) U^dagger psi`.
    pub fn apply_function(&self, psi: &StateVector, f: impl Fn(f64) -> C64) -> Result<StateVector> {
        check_dims(self.dim(), psi.len())?;
        let mut c = self.to_eigenbasis(psi.amplitudes());
        for (ck, &l) in c.iter_mut().zip(&self.eigenvalues) {
            *ck *= f(l);
        }
        Ok(StateVector::new(self.from_eigenbasis(&c)))
    }

    /// `exp(-i X t) psi`.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        self.apply_function(psi, |l| C64::from_polar(1.0, -l * t))
    }

    /// Weights `w_k` with `<bra, exp(-i X t) ket> = sum_k w_k exp(-i lambda_k t)`.
    pub fn overlap(&self, bra: &StateVector, ket: &StateVector) -> Result<super::OverlapSpectrum> {
        check_dims(self.dim(), bra.len())?;
        check_dims(self.dim(), ket.len())?;
        let cb = self.to_eigenbasis(bra.amplitudes());
        let ck = self.to_eigenbasis(ket.amplitudes());
        let weights = cb.iter().zip(&ck).map(|(b, k)| b.conj() * k).collect();
        Ok(super::OverlapSpectrum::new(self.eigenvalues.clone(), weights, None))
    }
}

fn eigh(m: MatRef<'_, C64>) -> Result<(Vec<f64>, Matrix)> {
    let n = m.nrows();
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| LabError::Numeric(format!("eigensolver failed on a {n}x{n} matrix: {e:?}")))?;
    let s = evd.S().column_vector();
    let vals: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(LabError::Numeric(format!("eigensolver returned non-finite values on a {n}x{n} matrix")));
    }
    Ok((vals, evd.U().to_owned()))
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Connected components of the nonzero pattern, each sorted, ordered by first index.
fn components(m: MatRef<'_, C64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    for j in 0..n {
        for i in 0..j {
            if m[(i, j)] != ZERO || m[(j, i)] != ZERO {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut root_slot = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = out.len();
            out.push(Vec::new());
        }
        out[root_slot[r]].push(i);
    }
    out
}

/// Ascending eigendecomposition of a Hermitian operator.
pub fn spectral(x: &HermitianOperator) -> Result<SpectralDecomposition> {
    let n = x.dim();
    let comps = components(x.matrix());
    if comps.len() == 1 {
        return spectral_unsplit(x);
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n);
    let mut vecs: Vec<Matrix> = Vec::with_capacity(comps.len());
    for (c, idx) in comps.iter().enumerate() {
        let sub = Matrix::from_fn(idx.len(), idx.len(), |i, j| x.get(idx[i], idx[j]));
        let (vals, u) = eigh(sub.as_ref())?;
        pairs.extend(vals.iter().enumerate().map(|(l, &v)| (v, c, l)));
        vecs.push(u);
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut u = Matrix::zeros(n, n);
    for (col, &(_, c, l)) in pairs.iter().enumerate() {
        for (r, &row) in comps[c].iter().enumerate() {
            u[(row, col)] = vecs[c][(r, l)];
        }
    }
    Ok(SpectralDecomposition { eigenvalues: pairs.iter().map(|p| p.0).collect(), eigenvectors: u })
}

/// Single dense eigendecomposition without splitting.
pub fn spectral_unsplit(x: &HermitianOperator) -> Result<SpectralDecomposition> {
    let (vals, u) = eigh(x.matrix())?;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    let n = vals.len();
    Ok(SpectralDecomposition {
        eigenvalues: order.iter().map(|&k| vals[k]).collect(),
        eigenvectors: Matrix::from_fn(n, n, |i, j| u[(i, order[j])]),
    })
}

/// `exp(-i X t) psi`.
pub fn evolve(generator: &HermitianOperator, state: &StateVector, t: f64) -> Result<StateVector> {
    check_dims(generator.dim(), state.len())?;
    spectral(generator)?.evolve(state, t)
}

/// `exp(i beta N) X exp(-i beta N)`.
pub fn conjugate_by_boost(x: &HermitianOperator, n: &HermitianOperator, beta: f64) -> Result<HermitianOperator> {
    check_dims(x.dim(), n.dim())?;
    if beta == 0.0 {
        return Ok(x.clone());
    }
    BoostConjugator::new(n)?.conjugate(x, beta)
}

/// Cached eigendecomposition of a boost generator `N` for repeated conjugations.
///
/// In the eigenbasis of `N`, conjugation by `exp(i beta N)` multiplies entry
/// `(i, j)` by `exp(i beta (nu_i - nu_j))`.
#[derive(Debug, Clone)]
pub struct BoostConjugator {
    spec: SpectralDecomposition,
}

impl BoostConjugator {
    pub fn new(n: &HermitianOperator) -> Result<Self> {
        Ok(Self { spec: spectral(n)? })
    }

    pub fn spectral(&self) -> &SpectralDecomposition {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// `U^dagger X U`.
    pub fn rotate(&self, x: MatRef<'_, C64>) -> Matrix {
        let u = self.spec.eigenvectors();
        mat_mul(adjoint_mul(u, x).as_ref(), u)
    }

    /// `U Y U^dagger`.
    pub fn unrotate(&self, y: MatRef<'_, C64>) -> Matrix {
        let u = self.spec.eigenvectors();
        let uy = mat_mul(u, y);
        let mut out = Matrix::zeros(uy.nrows(), u.nrows());
        faer::linalg::matmul::matmul(
            out.as_mut(),
            faer::Accum::Replace,
            uy.as_ref(),
            u.adjoint(),
            super::ONE,
            faer::Par::Seq,
        );
        out
    }

    /// Conjugation of an already rotated operator, staying in the eigenbasis.
    pub fn conjugate_rotated(&self, y: MatRef<'_, C64>, beta: f64) -> Matrix {
        let ph: Vec<C64> = self.spec.eigenvalues().iter().map(|&l| C64::from_polar(1.0, beta * l)).collect();
        Matrix::from_fn(y.nrows(), y.ncols(), |i, j| ph[i] * y[(i, j)] * ph[j].conj())
    }

    pub fn conjugate(&self, x: &HermitianOperator, beta: f64) -> Result<HermitianOperator> {
        check_dims(self.dim(), x.dim())?;
        let y = self.conjugate_rotated(self.rotate(x.matrix()).as_ref(), beta);
        HermitianOperator::new(self.unrotate(y.as_ref()))
    }

    /// `exp(i s N) psi`.
    pub fn exp_apply(&self, psi: &StateVector, s: f64) -> Result<StateVector> {
        self.spec.apply_function(psi, |l| C64::from_polar(1.0, s * l))
    }
}
