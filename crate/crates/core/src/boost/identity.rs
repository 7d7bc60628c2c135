use faer::MatRef;
use serde::Serialize;

use crate::error::Result;
use crate::forge::{check_dims, frobenius, frobenius_distance, BoostConjugator, HermitianOperator, Matrix, C64};
use crate::kinematics::BoostParams;

/// Recorded convention: `exp(+i beta N) H exp(-i beta N) = gamma H - gamma v P`
/// with `tanh beta = v`, so the state boost is `L_v = exp(-i beta N)`.
pub const SIGN_CONVENTION: &str =
    "exp(+i*beta*N) H exp(-i*beta*N) = gamma*H - gamma*v*P; L_v = exp(-i*beta*N); tanh(beta) = v";

/// `gamma H - gamma v P`.
pub fn boosted_hamiltonian_closed_form(h: &HermitianOperator, p: &HermitianOperator, v: f64) -> Result<HermitianOperator> {
    let b = BoostParams::from_velocity(v)?;
    HermitianOperator::lin_comb(b.gamma, h, -b.gamma * b.v, p)
}

/// `gamma P - gamma v H`.
pub fn boosted_momentum_closed_form(h: &HermitianOperator, p: &HermitianOperator, v: f64) -> Result<HermitianOperator> {
    let b = BoostParams::from_velocity(v)?;
    HermitianOperator::lin_comb(b.gamma, p, -b.gamma * b.v, h)
}

/// Relative distance between exact conjugation and the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoostIdentityErrors {
    pub beta: f64,
    /// `||e^{i beta N} H e^{-i beta N} - (gamma H - gamma v P)||_F / ||H||_F`
    pub e_h: f64,
    /// `||e^{i beta N} P e^{-i beta N} - (gamma P - gamma v H)||_F / ||P||_F`
    pub e_p: f64,
    /// Same differences applied to the probe states, relative to `||H W||`, `||P W||`.
    pub e_h_probe: Option<f64>,
    pub e_p_probe: Option<f64>,
}

/// Reuses one eigendecomposition of `N` for a sweep over rapidities.
///
/// Frobenius norms are unitarily invariant, so the comparison is carried out
/// in the eigenbasis of `N`, where conjugation is a phase per entry.
pub struct BoostIdentityVerifier {
    conj: BoostConjugator,
    h_rot: Matrix,
    p_rot: Matrix,
    w_rot: Option<Matrix>,
    h_norm: f64,
    p_norm: f64,
    hw_norm: f64,
    pw_norm: f64,
}

fn scale(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        1.0
    }
}

impl BoostIdentityVerifier {
    pub fn new(h: &HermitianOperator, p: &HermitianOperator, n: &HermitianOperator, probes: Option<MatRef<'_, C64>>) -> Result<Self> {
        check_dims(h.dim(), p.dim())?;
        check_dims(h.dim(), n.dim())?;
        let conj = BoostConjugator::new(n)?;
        Self::with_conjugator(conj, h, p, probes)
    }

    pub fn with_conjugator(conj: BoostConjugator, h: &HermitianOperator, p: &HermitianOperator, probes: Option<MatRef<'_, C64>>) -> Result<Self> {
        check_dims(conj.dim(), h.dim())?;
        check_dims(conj.dim(), p.dim())?;
        let h_rot = conj.rotate(h.matrix());
        let p_rot = conj.rotate(p.matrix());
        let (w_rot, hw_norm, pw_norm) = match probes {
            Some(w) => {
                check_dims(h.dim(), w.nrows())?;
                let wr = crate::forge::adjoint_mul(conj.spectral().eigenvectors(), w);
                let hw = crate::forge::mat_mul(h.matrix(), w);
                let pw = crate::forge::mat_mul(p.matrix(), w);
                (Some(wr), frobenius(hw.as_ref()), frobenius(pw.as_ref()))
            }
            None => (None, 0.0, 0.0),
        };
        Ok(Self { conj, h_rot, p_rot, w_rot, h_norm: h.frobenius_norm(), p_norm: p.frobenius_norm(), hw_norm, pw_norm })
    }

    pub fn conjugator(&self) -> &BoostConjugator {
        &self.conj
    }

    pub fn errors(&self, v: f64) -> Result<BoostIdentityErrors> {
        let b = BoostParams::from_velocity(v)?;
        Ok(self.errors_rapidity(b.beta, b.gamma, b.v))
    }

    pub fn errors_at_rapidity(&self, beta: f64) -> Result<BoostIdentityErrors> {
        let b = BoostParams::from_rapidity(beta)?;
        Ok(self.errors_rapidity(b.beta, b.gamma, b.v))
    }

    fn errors_rapidity(&self, beta: f64, gamma: f64, v: f64) -> BoostIdentityErrors {
        let n = self.h_rot.nrows();
        let xh = self.conj.conjugate_rotated(self.h_rot.as_ref(), beta);
        let xp = self.conj.conjugate_rotated(self.p_rot.as_ref(), beta);
        let th = Matrix::from_fn(n, n, |i, j| self.h_rot[(i, j)] * gamma - self.p_rot[(i, j)] * (gamma * v));
        let tp = Matrix::from_fn(n, n, |i, j| self.p_rot[(i, j)] * gamma - self.h_rot[(i, j)] * (gamma * v));
        let e_h = frobenius_distance(xh.as_ref(), th.as_ref()) / scale(self.h_norm);
        let e_p = frobenius_distance(xp.as_ref(), tp.as_ref()) / scale(self.p_norm);
        let (e_h_probe, e_p_probe) = match &self.w_rot {
            Some(w) => {
                let dh = Matrix::from_fn(n, n, |i, j| xh[(i, j)] - th[(i, j)]);
                let dp = Matrix::from_fn(n, n, |i, j| xp[(i, j)] - tp[(i, j)]);
                let a = frobenius(crate::forge::mat_mul(dh.as_ref(), w.as_ref()).as_ref()) / scale(self.hw_norm);
                let b = frobenius(crate::forge::mat_mul(dp.as_ref(), w.as_ref()).as_ref()) / scale(self.pw_norm);
                (Some(a), Some(b))
            }
            None => (None, None),
        };
        BoostIdentityErrors { beta, e_h, e_p, e_h_probe, e_p_probe }
    }
}

/// Frobenius identity errors at velocity `v`.
pub fn verify_boost_identity(h: &HermitianOperator, p: &HermitianOperator, n: &HermitianOperator, v: f64) -> Result<BoostIdentityErrors> {
    BoostParams::from_velocity(v)?;
    BoostIdentityVerifier::new(h, p, n, None)?.errors(v)
}
