use crate::error::Result;
use crate::kinematics::{BasisState, ModelParams, SectorBasis};

use super::{HermitianOperator, SparseOperator, C64};

/// Three-linear vertex `a <-> b + c` on the lattice.
///
/// `G(k1, k2) = g chi(k1) chi(k2) [8 w_a(k1+k2) w_b(k1) w_c(k2)]^(-1/2) sqrt(dk)`
/// with the Gaussian form factor `chi(k) = exp(-k^2 / (2 lambda^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionKernel {
    params: ModelParams,
    dk: f64,
}

impl InteractionKernel {
    pub fn new(params: &ModelParams, dk: f64) -> Self {
        Self { params: *params, dk }
    }

    pub fn form_factor(&self, k: f64) -> f64 {
        let l = self.params.lambda_ff;
        (-k * k / (2.0 * l * l)).exp()
    }

    pub fn coupling(&self, k1: f64, k2: f64) -> f64 {
        let p = &self.params;
        let wa = p.m_a.hypot(k1 + k2);
        let wb = p.m_b.hypot(k1);
        let wc = p.m_c.hypot(k2);
        p.g * self.form_factor(k1) * self.form_factor(k2) / (8.0 * wa * wb * wc).sqrt()
            * self.dk.sqrt()
    }
}

/// Bare energy of basis state `i`.
pub fn free_energy(basis: &SectorBasis, params: &ModelParams, i: usize) -> f64 {
    let g = basis.grid();
    match basis.state(i) {
        BasisState::A { p } => params.m_a.hypot(g.momentum(p)),
        BasisState::Bc { k1, k2 } => params.m_b.hypot(g.momentum(k1)) + params.m_c.hypot(g.momentum(k2)),
    }
}

pub fn free_hamiltonian_sparse(basis: &SectorBasis, params: &ModelParams) -> SparseOperator {
    let d: Vec<f64> = (0..basis.len()).map(|i| free_energy(basis, params, i)).collect();
    SparseOperator::diagonal(&d)
}

/// `A(K) <-> BC(k1, k2)` couplings for every pair whose total `K` is a grid mode.
pub fn interaction_sparse(basis: &SectorBasis, params: &ModelParams) -> SparseOperator {
    let grid = basis.grid();
    let kernel = InteractionKernel::new(params, grid.dk());
    let mut t = Vec::new();
    if params.g != 0.0 {
        for (j, s) in basis.states().iter().enumerate() {
            if let BasisState::Bc { k1, k2 } = *s {
                if let Some(a) = basis.a_index(k1 + k2) {
                    let v = C64::new(kernel.coupling(grid.momentum(k1), grid.momentum(k2)), 0.0);
                    t.push((a, j, v));
                    t.push((j, a, v));
                }
            }
        }
    }
    SparseOperator::from_triplets(basis.len(), t)
}

pub fn momentum_sparse(basis: &SectorBasis) -> SparseOperator {
    let d: Vec<f64> = (0..basis.len()).map(|i| basis.total_momentum(i)).collect();
    SparseOperator::diagonal(&d)
}

/// Hermitian part of `(i/2)(w D + D w)` for one particle of mass `m`, as
/// `(j, l, value)` nearest-neighbour entries on mode indices.
///
/// `D` is the central difference in the interior and a one-sided first-order
/// difference at the two edge modes.
fn single_particle_boost(m: f64, modes: &[f64], dk: f64) -> Vec<(usize, usize, C64)> {
    let n = modes.len();
    if n < 2 {
        return Vec::new();
    }
    let d = |j: usize, l: usize| -> f64 {
        if j == 0 {
            match l {
                0 => -1.0 / dk,
                1 => 1.0 / dk,
                _ => 0.0,
            }
        } else if j == n - 1 {
            if l == n - 1 {
                1.0 / dk
            } else if l == n - 2 {
                -1.0 / dk
            } else {
                0.0
            }
        } else if l == j + 1 {
            0.5 / dk
        } else if l + 1 == j {
            -0.5 / dk
        } else {
            0.0
        }
    };
    let w: Vec<f64> = modes.iter().map(|&k| m.hypot(k)).collect();
    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        for l in [j.wrapping_sub(1), j + 1] {
            if l >= n {
                continue;
            }
            let anti = d(j, l) - d(l, j);
            out.push((j, l, C64::new(0.0, 0.25 * (w[j] + w[l]) * anti)));
        }
    }
    out
}

/// Free boost generator `N0`: per-particle symmetrized generators, summed over
/// the `b` and `c` particles in the pair sector.
pub fn free_boost_sparse(basis: &SectorBasis, params: &ModelParams) -> SparseOperator {
    let grid = basis.grid();
    let modes = grid.modes();
    let half = grid.half();
    let n = grid.n_modes();
    let na = single_particle_boost(params.m_a, modes, grid.dk());
    let nb = single_particle_boost(params.m_b, modes, grid.dk());
    let nc = single_particle_boost(params.m_c, modes, grid.dk());
    let tick = |idx: usize| idx as i64 - half;
    let mut t = Vec::with_capacity(na.len() + n * (nb.len() + nc.len()));
    for &(j, l, v) in &na {
        t.push((basis.a_index(tick(j)).unwrap(), basis.a_index(tick(l)).unwrap(), v));
    }
    for spectator in 0..n {
        let s = tick(spectator);
        for &(j, l, v) in &nb {
            t.push((basis.bc_index(tick(j), s).unwrap(), basis.bc_index(tick(l), s).unwrap(), v));
        }
        for &(j, l, v) in &nc {
            t.push((basis.bc_index(s, tick(j)).unwrap(), basis.bc_index(s, tick(l)).unwrap(), v));
        }
    }
    SparseOperator::from_triplets(basis.len(), t)
}

pub fn build_free_hamiltonian(basis: &SectorBasis, params: &ModelParams) -> Result<HermitianOperator> {
    params.validate()?;
    HermitianOperator::from_sparse(&free_hamiltonian_sparse(basis, params))
}

pub fn build_interaction(basis: &SectorBasis, params: &ModelParams) -> Result<HermitianOperator> {
    params.validate()?;
    HermitianOperator::from_sparse(&interaction_sparse(basis, params))
}

/// Full Hamiltonian `H = H0 + H_int`.
pub fn build_hamiltonian(basis: &SectorBasis, params: &ModelParams) -> Result<HermitianOperator> {
    params.validate()?;
    let one = C64::new(1.0, 0.0);
    let h = SparseOperator::lin_comb(
        one,
        &free_hamiltonian_sparse(basis, params),
        one,
        &interaction_sparse(basis, params),
    );
    HermitianOperator::from_sparse(&h)
}

pub fn build_momentum(basis: &SectorBasis) -> HermitianOperator {
    let d: Vec<f64> = (0..basis.len()).map(|i| basis.total_momentum(i)).collect();
    HermitianOperator::diagonal(&d)
}

pub fn build_free_boost(basis: &SectorBasis, params: &ModelParams) -> Result<HermitianOperator> {
    params.validate()?;
    HermitianOperator::from_sparse(&free_boost_sparse(basis, params))
}
