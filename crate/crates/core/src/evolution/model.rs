use std::f64::consts::PI;

use serde::Serialize;

use crate::error::Result;
use crate::forge::{free_hamiltonian_sparse, interaction_sparse, momentum_sparse, BlockSpectrum, InteractionKernel, MomentumBlocks, SparseOperator, C64};
use crate::kinematics::{MomentumGrid, ModelParams, SectorBasis};

/// Basis, parameters and the block-diagonalized Hamiltonian of one model.
#[derive(Debug, Clone)]
pub struct LeeModel {
    basis: SectorBasis,
    params: ModelParams,
    blocks: MomentumBlocks,
    spectrum: BlockSpectrum,
}

impl LeeModel {
    pub fn new(grid: &MomentumGrid, params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let basis = SectorBasis::enumerate(grid);
        let blocks = MomentumBlocks::hamiltonian(&basis, params)?;
        let spectrum = blocks.spectral()?;
        Ok(Self { basis, params: *params, blocks, spectrum })
    }

    /// Only the listed total-momentum blocks; amplitudes of states outside
    /// them are rejected.
    pub fn with_blocks(grid: &MomentumGrid, params: &ModelParams, ticks: &[i64]) -> Result<Self> {
        params.validate()?;
        let basis = SectorBasis::enumerate(grid);
        let blocks = MomentumBlocks::hamiltonian_blocks(&basis, params, ticks)?;
        let spectrum = blocks.spectral()?;
        Ok(Self { basis, params: *params, blocks, spectrum })
    }

    pub fn basis(&self) -> &SectorBasis {
        &self.basis
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &MomentumGrid {
        self.basis.grid()
    }

    pub fn blocks(&self) -> &MomentumBlocks {
        &self.blocks
    }

    pub fn spectrum(&self) -> &BlockSpectrum {
        &self.spectrum
    }

    pub fn hamiltonian_sparse(&self) -> SparseOperator {
        let one = C64::new(1.0, 0.0);
        let h0 = free_hamiltonian_sparse(&self.basis, &self.params);
        if self.params.g == 0.0 {
            return h0;
        }
        SparseOperator::lin_comb(one, &h0, one, &interaction_sparse(&self.basis, &self.params))
    }

    pub fn momentum_sparse(&self) -> SparseOperator {
        momentum_sparse(&self.basis)
    }

    pub fn golden_rule(&self) -> Result<GoldenRule> {
        golden_rule_width(&self.params, self.grid().dk())
    }
}

/// Lowest-order decay width of `a` at rest into the `b c` pair continuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GoldenRule {
    /// Resonant pair momentum with `w_b(k) + w_c(-k) = m_a`.
    pub k_star: f64,
    /// `|G(k*, -k*)|^2 / dk`, independent of the spacing.
    pub coupling_density: f64,
    /// `|d(w_b(k) + w_c(-k))/dk|` at `k*`.
    pub group_velocity: f64,
    pub gamma_rate: f64,
}

/// `Gamma = sum_{k = +-k*} 2 pi |G(k, -k)|^2 rho`, with `rho = 1 / (|dE/dk| dk)`
/// the density of pair levels of the continuum at rest.
pub fn golden_rule_width(params: &ModelParams, dk: f64) -> Result<GoldenRule> {
    params.validate()?;
    let (ma, mb, mc) = (params.m_a, params.m_b, params.m_c);
    let k2 = (ma * ma - (mb + mc).powi(2)) * (ma * ma - (mb - mc).powi(2)) / (4.0 * ma * ma);
    let k_star = k2.max(0.0).sqrt();
    let kernel = InteractionKernel::new(params, dk);
    let g = kernel.coupling(k_star, -k_star);
    let coupling_density = g * g / dk;
    let group_velocity = k_star / mb.hypot(k_star) + k_star / mc.hypot(k_star);
    let gamma_rate = 2.0 * 2.0 * PI * coupling_density / group_velocity;
    Ok(GoldenRule { k_star, coupling_density, group_velocity, gamma_rate })
}
