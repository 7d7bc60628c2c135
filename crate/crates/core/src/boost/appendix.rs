use faer::{MatRef, Side};
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::forge::{check_dims, commutator_mat, mat_mul, BoostConjugator, HermitianOperator, Matrix, C64};

/// Truncated adjoint series `sum_{j <= order} (i beta)^j ad_N^j(X) / j!`.
pub fn bch_series(x: &HermitianOperator, n: &HermitianOperator, beta: f64, order: usize) -> Result<Matrix> {
    check_dims(x.dim(), n.dim())?;
    let mut term = x.matrix().to_owned();
    let mut sum = term.clone();
    for j in 1..=order {
        let c = commutator_mat(n.matrix(), term.as_ref())?;
        let f = C64::new(0.0, beta / j as f64);
        term = Matrix::from_fn(c.nrows(), c.ncols(), |r, s| c[(r, s)] * f);
        sum = Matrix::from_fn(sum.nrows(), sum.ncols(), |r, s| sum[(r, s)] + term[(r, s)]);
    }
    Ok(sum)
}

/// `||bch_series(X, N, beta, m) - e^{i beta N} X e^{-i beta N}||_F / ||X||_F` for
/// `m = 0..=max_order`, evaluated in the eigenbasis of `N` where `ad_N` acts
/// entrywise as multiplication by `nu_i - nu_j`.
pub fn bch_errors(conj: &BoostConjugator, x: &HermitianOperator, beta: f64, max_order: usize) -> Result<Vec<f64>> {
    check_dims(conj.dim(), x.dim())?;
    let y = conj.rotate(x.matrix());
    let nu = conj.spectral().eigenvalues();
    let n = x.dim();
    let scale = x.frobenius_norm();
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut err = vec![0.0; max_order + 1];
    for j in 0..n {
        for i in 0..n {
            let z = C64::new(0.0, beta * (nu[i] - nu[j]));
            let exact = z.exp() * y[(i, j)];
            let mut term = y[(i, j)];
            let mut sum = term;
            err[0] += (sum - exact).norm_sqr();
            for (m, e) in err.iter_mut().enumerate().skip(1) {
                term = term * z / m as f64;
                sum += term;
                *e += (sum - exact).norm_sqr();
            }
        }
    }
    Ok(err.into_iter().map(|e| e.sqrt() / scale).collect())
}

/// Gram conditions above this are rejected.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpanDecomposition {
    /// Real coefficients, in the order the basis operators were given.
    pub coefficients: [f64; 3],
    /// `||X - sum c_a B_a||_F / ||X||_F`.
    pub residual: f64,
    pub gram_condition: f64,
}

fn re_inner(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            let (x, y) = (a[(i, j)], b[(i, j)]);
            s += x.re * y.re + x.im * y.im;
        }
    }
    s
}

fn solve_gram(gram: [[f64; 3]; 3], rhs: [f64; 3]) -> Result<([f64; 3], f64)> {
    let g = faer::Mat::<f64>::from_fn(3, 3, |a, b| gram[a][b]);
    let evd = g
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| LabError::Numeric(format!("Gram eigensolver failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let lam: Vec<f64> = (0..3).map(|i| s[i]).collect();
    let lmax = lam.iter().cloned().fold(f64::MIN, f64::max);
    let lmin = lam.iter().cloned().fold(f64::MAX, f64::min);
    let cond = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
    if !(cond <= GRAM_CONDITION_LIMIT) {
        return Err(LabError::Numeric(format!("span basis is ill-conditioned: Gram condition {cond:.3e}")));
    }
    let u = evd.U();
    let mut c = [0.0; 3];
    for k in 0..3 {
        let proj = (0..3).map(|a| u[(a, k)] * rhs[a]).fold(0.0, |x, y| x + y) / lam[k];
        for a in 0..3 {
            c[a] += u[(a, k)] * proj;
        }
    }
    Ok((c, cond))
}

fn relative_residual(x: MatRef<'_, C64>, b: [MatRef<'_, C64>; 3], c: [f64; 3]) -> f64 {
    let mut res = 0.0;
    let mut xn = 0.0;
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            let fit = b[0][(i, j)] * c[0] + b[1][(i, j)] * c[1] + b[2][(i, j)] * c[2];
            res += (x[(i, j)] - fit).norm_sqr();
            xn += x[(i, j)].norm_sqr();
        }
    }
    if xn > 0.0 { (res / xn).sqrt() } else { res.sqrt() }
}

fn project(x: MatRef<'_, C64>, b: [MatRef<'_, C64>; 3]) -> Result<SpanDecomposition> {
    let mut gram = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for a in 0..3 {
        rhs[a] = re_inner(b[a], x);
        for c in 0..3 {
            gram[a][c] = re_inner(b[a], b[c]);
        }
    }
    let (coefficients, gram_condition) = solve_gram(gram, rhs)?;
    Ok(SpanDecomposition { coefficients, residual: relative_residual(x, b, coefficients), gram_condition })
}

/// Real least-squares projection of `x` onto `span{B_0, B_1, B_2}` under
/// `<A, B> = Re tr(A^dagger B)`.
pub fn span_decomposition(x: MatRef<'_, C64>, basis_ops: [&HermitianOperator; 3]) -> Result<SpanDecomposition> {
    for b in basis_ops {
        check_dims(x.nrows(), b.dim())?;
    }
    check_dims(x.nrows(), x.ncols())?;
    project(x, basis_ops.map(|b| b.matrix()))
}

/// Same projection under `<A, B>_W = Re tr((A W)^dagger B W)` for a block of
/// probe columns `w`; the residual is `||(X - sum c_a B_a) W|| / ||X W||`.
pub fn span_decomposition_weighted(
    x: MatRef<'_, C64>,
    basis_ops: [&HermitianOperator; 3],
    w: MatRef<'_, C64>,
) -> Result<SpanDecomposition> {
    for b in basis_ops {
        check_dims(x.nrows(), b.dim())?;
    }
    check_dims(x.nrows(), x.ncols())?;
    check_dims(x.nrows(), w.nrows())?;
    let xw = mat_mul(x, w);
    let bw = basis_ops.map(|b| mat_mul(b.matrix(), w));
    project(xw.as_ref(), [bw[0].as_ref(), bw[1].as_ref(), bw[2].as_ref()])
}

/// Samples of `(h, p)` solving `dh/dbeta = -p`, `dp/dbeta = -h`, `h(0) = 1`, `p(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientTrajectory {
    pub beta_grid: Vec<f64>,
    pub h_values: Vec<f64>,
    pub p_values: Vec<f64>,
}

impl CoefficientTrajectory {
    /// `max |h - cosh beta| + |p + sinh beta|`.
    pub fn max_closed_form_deviation(&self) -> f64 {
        self.beta_grid
            .iter()
            .zip(self.h_values.iter().zip(&self.p_values))
            .map(|(&b, (&h, &p))| (h - b.cosh()).abs() + (p + b.sinh()).abs())
            .fold(0.0, f64::max)
    }

    /// `max |h^2 - p^2 - 1|`.
    pub fn max_invariant_defect(&self) -> f64 {
        self.h_values.iter().zip(&self.p_values).map(|(h, p)| (h * h - p * p - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn last(&self) -> (f64, f64, f64) {
        let k = self.beta_grid.len() - 1;
        (self.beta_grid[k], self.h_values[k], self.p_values[k])
    }
}

/// Classical fixed-step RK4 from `0` to `beta_end` (either sign); the step is
/// shrunk so that an integer number of steps lands on `beta_end` exactly.
pub fn integrate_coefficients(beta_end: f64, step: f64) -> Result<CoefficientTrajectory> {
    if !(step > 0.0) || !beta_end.is_finite() {
        return Err(LabError::Domain(format!("invalid integration range {beta_end} with step {step}")));
    }
    let steps = (beta_end.abs() / step).ceil().max(1.0) as usize;
    let hstep = beta_end / steps as f64;
    let f = |h: f64, p: f64| (-p, -h);
    let (mut h, mut p) = (1.0f64, 0.0f64);
    let mut out = CoefficientTrajectory { beta_grid: vec![0.0], h_values: vec![h], p_values: vec![p] };
    if beta_end == 0.0 {
        return Ok(out);
    }
    for k in 1..=steps {
        let (a1, b1) = f(h, p);
        let (a2, b2) = f(h + 0.5 * hstep * a1, p + 0.5 * hstep * b1);
        let (a3, b3) = f(h + 0.5 * hstep * a2, p + 0.5 * hstep * b2);
        let (a4, b4) = f(h + hstep * a3, p + hstep * b3);
        h += hstep / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        p += hstep / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        out.beta_grid.push(if k == steps { beta_end } else { hstep * k as f64 });
        out.h_values.push(h);
        out.p_values.push(p);
    }
    Ok(out)
}

/// Forward integration on `[0, beta_max]`.
pub fn solve_coefficient_ode(beta_max: f64, step: f64) -> Result<CoefficientTrajectory> {
    if !(beta_max > 0.0) {
        return Err(LabError::Domain(format!("beta_max must be positive, got {beta_max}")));
    }
    integrate_coefficients(beta_max, step)
}
