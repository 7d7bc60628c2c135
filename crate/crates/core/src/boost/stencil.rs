use super::probes::probe_states;
use super::residuals::probe_residual;
use crate::error::Result;
use crate::forge::{
    free_boost_sparse, interaction_sparse, momentum_sparse, HermitianOperator, SparseOperator, C64,
};
use crate::kinematics::{BasisState, ModelParams, SectorBasis};

/// `N_int` stencil with sign `sign`: `<A(K +- dk)| N |BC(k1, k2)> = -+ i sign G / (2 dk)`.
///
/// Only pairs whose own total `K` is a grid mode carry entries, matching the
/// support of `H_int`.
pub fn interaction_boost_sparse(basis: &SectorBasis, params: &ModelParams, sign: f64) -> SparseOperator {
    let grid = basis.grid();
    let dk = grid.dk();
    let hint = interaction_sparse(basis, params);
    let mut t = Vec::new();
    for (j, s) in basis.states().iter().enumerate() {
        let BasisState::Bc { k1, k2 } = *s else { continue };
        let Some(a0) = basis.a_index(k1 + k2) else { continue };
        let g = hint.get(a0, j).re;
        if g == 0.0 {
            continue;
        }
        for (shift, dir) in [(1i64, -1.0), (-1, 1.0)] {
            if let Some(a) = basis.a_index(k1 + k2 + shift) {
                let v = C64::new(0.0, dir * sign * g / (2.0 * dk));
                t.push((a, j, v));
                t.push((j, a, v.conj()));
            }
        }
    }
    SparseOperator::from_triplets(basis.len(), t)
}

/// Interaction boost stencil with its globally fixed sign.
#[derive(Debug, Clone)]
pub struct BoostStencil {
    pub operator: SparseOperator,
    pub sign: f64,
    /// Probe-weighted `||([N_int, P] - i H_int) W|| / ||H_int W||` for sign `+1` and `-1`.
    pub sign_residuals: [f64; 2],
}

impl BoostStencil {
    pub fn to_operator(&self) -> Result<HermitianOperator> {
        HermitianOperator::from_sparse(&self.operator)
    }
}

/// Builds both sign choices and keeps the one with the smaller probe-weighted
/// `[N_int, P] - i H_int`; ties (free theory) keep `+1`.
pub fn build_interaction_boost_stencil(basis: &SectorBasis, params: &ModelParams) -> Result<BoostStencil> {
    params.validate()?;
    let w = probe_states(basis);
    let hint = interaction_sparse(basis, params);
    let p = momentum_sparse(basis);
    let pd = p.diagonal_values();
    let eval = |sign: f64| {
        let n = interaction_boost_sparse(basis, params, sign);
        probe_residual(&n.commutator_diagonal(&pd), &hint, w.as_ref())
    };
    let plus = eval(1.0);
    let minus = eval(-1.0);
    let sign = if minus < plus { -1.0 } else { 1.0 };
    Ok(BoostStencil { operator: interaction_boost_sparse(basis, params, sign), sign, sign_residuals: [plus, minus] })
}

/// Full boost generator `N = N0 + N_int`.
#[derive(Debug, Clone)]
pub struct BoostGenerator {
    n0: SparseOperator,
    stencil: BoostStencil,
    n: SparseOperator,
}

impl BoostGenerator {
    pub fn stencil(basis: &SectorBasis, params: &ModelParams) -> Result<Self> {
        let n0 = free_boost_sparse(basis, params);
        let stencil = build_interaction_boost_stencil(basis, params)?;
        let one = C64::new(1.0, 0.0);
        let n = SparseOperator::lin_comb(one, &n0, one, &stencil.operator);
        Ok(Self { n0, stencil, n })
    }

    /// Same `N0` and stencil, with the total generator replaced.
    pub fn with_operator(&self, n: SparseOperator) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn free(&self) -> &SparseOperator {
        &self.n0
    }

    pub fn interaction(&self) -> &BoostStencil {
        &self.stencil
    }

    pub fn sign(&self) -> f64 {
        self.stencil.sign
    }

    pub fn sparse(&self) -> &SparseOperator {
        &self.n
    }

    pub fn to_operator(&self) -> Result<HermitianOperator> {
        HermitianOperator::from_sparse(&self.n)
    }
}
