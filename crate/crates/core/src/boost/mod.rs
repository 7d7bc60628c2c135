//! The boost generator `N = N0 + N_int` and the identities it is meant to satisfy.
//!
//! On a truncated lattice the algebra `[N,H] = iP`, `[N,P] = iH` never closes
//! exactly, so residuals are reported rather than assumed.

mod appendix;
mod identity;
mod lsq;
mod probes;
mod residuals;
mod stencil;

pub use appendix::{
    bch_errors, bch_series, integrate_coefficients, solve_coefficient_ode, span_decomposition, span_decomposition_weighted, CoefficientTrajectory,
    SpanDecomposition, GRAM_CONDITION_LIMIT,
};
pub use identity::{
    boosted_hamiltonian_closed_form, boosted_momentum_closed_form, verify_boost_identity, BoostIdentityErrors,
    BoostIdentityVerifier, SIGN_CONVENTION,
};
pub use lsq::{lsq_objective, refine_boost_least_squares, BoostPattern, LsqDiagnostics, LsqOptions};
pub use probes::{probe_states, PROBE_COUNT};
pub use residuals::{algebra_residuals, algebra_residuals_sparse, AlgebraResiduals};
pub use stencil::{build_interaction_boost_stencil, interaction_boost_sparse, BoostGenerator, BoostStencil};
