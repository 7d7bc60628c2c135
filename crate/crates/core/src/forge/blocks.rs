//! Total-momentum block structure of momentum-conserving operators.
//!
//! `H`, `P` and any closed-form boost of them are block diagonal in total
//! momentum, so amplitudes and evolutions are computed block by block. The
//! kernel constructors build only the requested blocks, which keeps large
//! grids usable without ever forming the full dense matrix.

use std::f64::consts::PI;

use super::{builders::InteractionKernel, check_dims, free_energy, HermitianOperator, Matrix, SpectralDecomposition, StateVector, C64, ZERO};
use crate::error::{LabError, Result};
use crate::kinematics::{gamma_factor, BasisState, ModelParams, SectorBasis};

/// One total-momentum block `X_K` together with its basis indices.
#[derive(Debug, Clone)]
pub struct OperatorBlock {
    tick: i64,
    momentum: f64,
    indices: Vec<usize>,
    matrix: HermitianOperator,
}

impl OperatorBlock {
    pub fn tick(&self) -> i64 {
        self.tick
    }

    pub fn momentum(&self) -> f64 {
        self.momentum
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn matrix(&self) -> &HermitianOperator {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct MomentumBlocks {
    dim: usize,
    blocks: Vec<OperatorBlock>,
}

impl MomentumBlocks {
    /// Splits a dense operator; coupling between different totals is an error.
    pub fn from_operator(basis: &SectorBasis, x: &HermitianOperator) -> Result<Self> {
        check_dims(basis.len(), x.dim())?;
        let n = x.dim();
        let mut owner = vec![0i64; n];
        for (&t, idx) in basis.block_index() {
            for &i in idx {
                owner[i] = t;
            }
        }
        for j in 0..n {
            for i in 0..n {
                if owner[i] != owner[j] && x.get(i, j) != ZERO {
                    return Err(LabError::Numeric(format!(
                        "operator couples total-momentum blocks at entry ({i}, {j})"
                    )));
                }
            }
        }
        let dk = basis.grid().dk();
        let mut blocks = Vec::with_capacity(basis.block_index().len());
        for (&t, idx) in basis.block_index() {
            let m = Matrix::from_fn(idx.len(), idx.len(), |a, b| x.get(idx[a], idx[b]));
            blocks.push(OperatorBlock { tick: t, momentum: t as f64 * dk, indices: idx.clone(), matrix: HermitianOperator::new(m)? });
        }
        Ok(Self { dim: n, blocks })
    }

    /// Every block of `H = H0 + H_int`, assembled directly from the kernel.
    pub fn hamiltonian(basis: &SectorBasis, params: &ModelParams) -> Result<Self> {
        let ticks: Vec<i64> = basis.block_index().keys().copied().collect();
        Self::hamiltonian_blocks(basis, params, &ticks)
    }

    /// Selected blocks of `H`, in the order given.
    pub fn hamiltonian_blocks(basis: &SectorBasis, params: &ModelParams, ticks: &[i64]) -> Result<Self> {
        params.validate()?;
        let grid = basis.grid();
        let kernel = InteractionKernel::new(params, grid.dk());
        let mut blocks = Vec::with_capacity(ticks.len());
        for &t in ticks {
            let idx = basis.block(t).to_vec();
            if idx.is_empty() {
                return Err(LabError::Domain(format!("no basis states with total momentum tick {t}")));
            }
            let mut m = Matrix::zeros(idx.len(), idx.len());
            for (a, &i) in idx.iter().enumerate() {
                m[(a, a)] = C64::new(free_energy(basis, params, i), 0.0);
            }
            if let Some(a_pos) = idx.iter().position(|&i| matches!(basis.state(i), BasisState::A { .. })) {
                for (b, &i) in idx.iter().enumerate() {
                    if let BasisState::Bc { k1, k2 } = basis.state(i) {
                        let g = C64::new(kernel.coupling(grid.momentum(k1), grid.momentum(k2)), 0.0);
                        m[(a_pos, b)] = g;
                        m[(b, a_pos)] = g;
                    }
                }
            }
            blocks.push(OperatorBlock { tick: t, momentum: grid.momentum(t), indices: idx, matrix: HermitianOperator::new(m)? });
        }
        Ok(Self { dim: basis.len(), blocks })
    }

    /// Blockwise `gamma X_K - gamma v K`.
    pub fn boosted(&self, v: f64) -> Result<Self> {
        let g = gamma_factor(v)?;
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let n = b.len();
                let m = Matrix::from_fn(n, n, |i, j| {
                    let x = b.matrix.get(i, j) * g;
                    if i == j { x - g * v * b.momentum } else { x }
                });
                Ok(OperatorBlock { matrix: HermitianOperator::new(m)?, ..b.clone() })
            })
            .collect::<Result<_>>()?;
        Ok(Self { dim: self.dim, blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[OperatorBlock] {
        &self.blocks
    }

    pub fn block(&self, tick: i64) -> Option<&OperatorBlock> {
        self.blocks.iter().find(|b| b.tick == tick)
    }

    /// Dense reassembly; unbuilt blocks are left zero.
    pub fn to_operator(&self) -> Result<HermitianOperator> {
        let mut m = Matrix::zeros(self.dim, self.dim);
        for b in &self.blocks {
            for (a, &i) in b.indices.iter().enumerate() {
                for (c, &j) in b.indices.iter().enumerate() {
                    m[(i, j)] = b.matrix.get(a, c);
                }
            }
        }
        HermitianOperator::new(m)
    }

    pub fn spectral(&self) -> Result<BlockSpectrum> {
        let mut owner = vec![usize::MAX; self.dim];
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (slot, b) in self.blocks.iter().enumerate() {
            for &i in &b.indices {
                owner[i] = slot;
            }
            blocks.push((b.tick, b.indices.clone(), super::spectral(&b.matrix)?));
        }
        Ok(BlockSpectrum { dim: self.dim, owner, blocks })
    }
}

/// Per-block eigendecompositions.
#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    dim: usize,
    owner: Vec<usize>,
    blocks: Vec<(i64, Vec<usize>, SpectralDecomposition)>,
}

impl BlockSpectrum {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block_spectrum(&self, tick: i64) -> Option<&SpectralDecomposition> {
        self.blocks.iter().find(|b| b.0 == tick).map(|b| &b.2)
    }

    /// `pi / mean level spacing` of one block; `None` for a single level.
    pub fn recurrence_guard(&self, tick: i64) -> Option<f64> {
        self.block_spectrum(tick).and_then(|s| recurrence_guard(s.eigenvalues()))
    }

    fn gather(&self, psi: &[C64], idx: &[usize]) -> Vec<C64> {
        idx.iter().map(|&i| psi[i]).collect()
    }

    fn uncovered_support(&self, psi: &[C64]) -> bool {
        psi.iter().zip(&self.owner).any(|(a, &o)| o == usize::MAX && *a != ZERO)
    }

    /// `<bra, exp(-i X t) ket>` as a sum of exponentials.
    ///
    /// The recurrence guard is the smallest one among blocks carrying weight.
    pub fn overlap(&self, bra: &StateVector, ket: &StateVector) -> Result<OverlapSpectrum> {
        check_dims(self.dim, bra.len())?;
        check_dims(self.dim, ket.len())?;
        if self.uncovered_support(bra.amplitudes()) && self.uncovered_support(ket.amplitudes()) {
            return Err(LabError::Domain("states overlap outside the assembled momentum blocks".into()));
        }
        let mut eigenvalues = Vec::new();
        let mut weights = Vec::new();
        let mut guard: Option<f64> = None;
        for (_, idx, s) in &self.blocks {
            let cb = s.to_eigenbasis(&self.gather(bra.amplitudes(), idx));
            let ck = s.to_eigenbasis(&self.gather(ket.amplitudes(), idx));
            let w: Vec<C64> = cb.iter().zip(&ck).map(|(b, k)| b.conj() * k).collect();
            if w.iter().map(|x| x.norm()).sum::<f64>() > 1e-12 {
                if let Some(g) = recurrence_guard(s.eigenvalues()) {
                    guard = Some(guard.map_or(g, |h: f64| h.min(g)));
                }
            }
            eigenvalues.extend_from_slice(s.eigenvalues());
            weights.extend(w);
        }
        Ok(OverlapSpectrum::new(eigenvalues, weights, guard))
    }

    /// Full-space `exp(-i X t) psi`; support outside the assembled blocks is an error.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        check_dims(self.dim, psi.len())?;
        if self.uncovered_support(psi.amplitudes()) {
            return Err(LabError::Domain("state has support outside the assembled momentum blocks".into()));
        }
        let mut out = vec![ZERO; self.dim];
        for (_, idx, s) in &self.blocks {
            let sub = StateVector::new(self.gather(psi.amplitudes(), idx));
            let e = s.evolve(&sub, t)?;
            for (&i, &a) in idx.iter().zip(e.amplitudes()) {
                out[i] = a;
            }
        }
        Ok(StateVector::new(out))
    }
}

fn recurrence_guard(eigenvalues: &[f64]) -> Option<f64> {
    let n = eigenvalues.len();
    if n < 2 {
        return None;
    }
    let spacing = (eigenvalues[n - 1] - eigenvalues[0]) / (n - 1) as f64;
    (spacing > 0.0).then(|| PI / spacing)
}

/// `f(t) = sum_k w_k exp(-i lambda_k t)`, summed in index order.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapSpectrum {
    eigenvalues: Vec<f64>,
    weights: Vec<C64>,
    recurrence_guard: Option<f64>,
}

impl OverlapSpectrum {
    pub fn new(eigenvalues: Vec<f64>, weights: Vec<C64>, recurrence_guard: Option<f64>) -> Self {
        assert_eq!(eigenvalues.len(), weights.len());
        Self { eigenvalues, weights, recurrence_guard }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    pub fn recurrence_guard(&self) -> Option<f64> {
        self.recurrence_guard
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.eigenvalues
            .iter()
            .zip(&self.weights)
            .fold(ZERO, |acc, (&l, &w)| acc + w * C64::from_polar(1.0, -l * t))
    }

    pub fn series(&self, t_grid: &[f64]) -> Vec<C64> {
        t_grid.iter().map(|&t| self.eval(t)).collect()
    }
}
