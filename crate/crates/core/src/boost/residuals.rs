use faer::MatRef;
use serde::Serialize;

use crate::error::Result;
use crate::forge::{check_dims, frobenius, HermitianOperator, SparseOperator, C64, I};

/// Closure defects of `[N, H] = iP`, `[N, P] = iH`, `[H, P] = 0`.
///
/// The Frobenius forms weigh every lattice state equally, including pairs at
/// the cutoff; the probe forms restrict to smooth interior test states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlgebraResiduals {
    /// `||[N,H] - iP||_F / ||P||_F`
    #[serde(rename = "r_NH")]
    pub r_nh: f64,
    /// `||[N,P] - iH||_F / ||H||_F`
    #[serde(rename = "r_NP")]
    pub r_np: f64,
    /// `||[H,P]||_F`
    #[serde(rename = "r_HP")]
    pub r_hp: f64,
    /// `||([N,H] - iP) W||_F / ||P W||_F`
    #[serde(rename = "r_NH_probe")]
    pub r_nh_probe: Option<f64>,
    /// `||([N,P] - iH) W||_F / ||H W||_F`
    #[serde(rename = "r_NP_probe")]
    pub r_np_probe: Option<f64>,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// `||C - iT||_F / ||T||_F`.
fn relative_defect(c: &SparseOperator, t: &SparseOperator) -> f64 {
    let d = SparseOperator::lin_comb(C64::new(1.0, 0.0), c, -I, t);
    ratio(d.frobenius_norm(), t.frobenius_norm())
}

/// `||(C - iT) W||_F / ||T W||_F`.
pub(crate) fn probe_residual(c: &SparseOperator, t: &SparseOperator, w: MatRef<'_, C64>) -> f64 {
    let cw = c.mul_mat(w);
    let tw = t.mul_mat(w);
    let mut num = 0.0;
    for j in 0..w.ncols() {
        for i in 0..w.nrows() {
            num += (cw[(i, j)] - I * tw[(i, j)]).norm_sqr();
        }
    }
    ratio(num.sqrt(), frobenius(tw.as_ref()))
}

fn commute(a: &SparseOperator, b: &SparseOperator) -> SparseOperator {
    if b.is_diagonal() {
        a.commutator_diagonal(&b.diagonal_values())
    } else {
        a.commutator(b)
    }
}

/// Residuals from sparse operators; probe forms are filled when `probes` is given.
pub fn algebra_residuals_sparse(
    h: &SparseOperator,
    p: &SparseOperator,
    n: &SparseOperator,
    probes: Option<MatRef<'_, C64>>,
) -> Result<AlgebraResiduals> {
    check_dims(h.dim(), p.dim())?;
    check_dims(h.dim(), n.dim())?;
    let nh = commute(n, h);
    let np = commute(n, p);
    let hp = commute(h, p);
    let (r_nh_probe, r_np_probe) = match probes {
        Some(w) => {
            check_dims(h.dim(), w.nrows())?;
            (Some(probe_residual(&nh, p, w)), Some(probe_residual(&np, h, w)))
        }
        None => (None, None),
    };
    Ok(AlgebraResiduals {
        r_nh: relative_defect(&nh, p),
        r_np: relative_defect(&np, h),
        r_hp: hp.frobenius_norm(),
        r_nh_probe,
        r_np_probe,
    })
}

/// Frobenius residuals of dense operators.
pub fn algebra_residuals(h: &HermitianOperator, p: &HermitianOperator, n: &HermitianOperator) -> Result<AlgebraResiduals> {
    algebra_residuals_sparse(&h.to_sparse(), &p.to_sparse(), &n.to_sparse(), None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_generator_has_unit_residuals() {
        let h = HermitianOperator::diagonal(&[1.0, 2.0, 3.0]);
        let p = HermitianOperator::diagonal(&[0.0, 1.0, -1.0]);
        let r = algebra_residuals(&h, &p, &HermitianOperator::zeros(3)).unwrap();
        assert_eq!(r.r_nh, 1.0);
        assert_eq!(r.r_np, 1.0);
        assert_eq!(r.r_hp, 0.0);
        assert!(r.r_nh_probe.is_none());
    }

    #[test]
    fn dimension_mismatch() {
        let h = HermitianOperator::zeros(2);
        assert!(algebra_residuals(&h, &h, &HermitianOperator::zeros(3)).is_err());
    }
}
