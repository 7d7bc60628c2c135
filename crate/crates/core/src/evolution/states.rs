use crate::error::{LabError, Result};
use crate::forge::{StateVector, C64};
use crate::kinematics::{BasisState, SectorBasis};

/// Bare `a` particle at rest, `A(0)`.
pub fn make_phi0(basis: &SectorBasis) -> StateVector {
    let i = basis.a_index(0).expect("odd grids always contain k = 0");
    StateVector::basis_vector(basis.len(), i)
}

/// Gaussian packet `exp(-p^2 / (4 width^2))` over the `A(p)` states.
pub fn make_packet_phi0(basis: &SectorBasis, width: f64) -> Result<StateVector> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(LabError::Domain(format!("packet width must be positive, got {width}")));
    }
    let grid = basis.grid();
    let amps = basis
        .states()
        .iter()
        .map(|s| match *s {
            BasisState::A { p } => {
                let k = grid.momentum(p);
                C64::new((-k * k / (4.0 * width * width)).exp(), 0.0)
            }
            BasisState::Bc { .. } => C64::new(0.0, 0.0),
        })
        .collect();
    StateVector::normalized(amps)
}

/// Bare `a` particle with grid momentum `p`.
pub fn make_psi_p(basis: &SectorBasis, p: f64) -> Result<StateVector> {
    let tick = basis.grid().tick_of(p)?;
    let i = basis.a_index(tick).expect("tick_of only returns grid ticks");
    Ok(StateVector::basis_vector(basis.len(), i))
}
