//! Patterned least-squares completion of the boost generator.
//!
//! Unknowns are the upper-triangle entries of a Hermitian `N` on a fixed
//! pattern (real diagonal, complex off-diagonal). The objective is the
//! probe-weighted closure defect
//! `||([N,H] - iP) W||_F^2 + ||([N,P] - iH) W||_F^2`, which is linear in `N`,
//! and is minimized by CGLS (conjugate gradients on the normal equations).

use std::collections::BTreeSet;

use faer::MatRef;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::forge::{check_dims, SparseOperator, C64, I};
use crate::kinematics::SectorBasis;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Hermitian sparsity pattern, stored as its upper triangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoostPattern {
    dim: usize,
    upper: Vec<(usize, usize)>,
}

impl BoostPattern {
    /// `entries` must be closed under `(i, j) -> (j, i)`.
    pub fn from_entries(dim: usize, entries: &[(usize, usize)]) -> Result<Self> {
        let set: BTreeSet<(usize, usize)> = entries.iter().copied().collect();
        for &(i, j) in &set {
            if i >= dim || j >= dim {
                return Err(LabError::DimensionMismatch { expected: dim, found: i.max(j) + 1 });
            }
            if !set.contains(&(j, i)) {
                return Err(LabError::Domain(format!("pattern holds ({i}, {j}) but not its mirror ({j}, {i})")));
            }
        }
        Ok(Self { dim, upper: set.into_iter().filter(|&(i, j)| i <= j).collect() })
    }

    /// Every pair of states whose total momenta differ by one grid tick.
    pub fn neighbor_blocks(basis: &SectorBasis) -> Self {
        let mut upper = Vec::new();
        let blocks = basis.block_index();
        for (&t, lo) in blocks {
            if let Some(hi) = blocks.get(&(t + 1)) {
                for &i in lo {
                    for &j in hi {
                        upper.push((i.min(j), i.max(j)));
                    }
                }
            }
        }
        upper.sort_unstable();
        upper.dedup();
        Self { dim: basis.len(), upper }
    }

    /// Union with the support of `s`.
    pub fn with_support(&self, s: &SparseOperator) -> Self {
        let mut set: BTreeSet<(usize, usize)> = self.upper.iter().copied().collect();
        set.extend(s.iter().map(|(i, j, _)| (i.min(j), i.max(j))));
        Self { dim: self.dim, upper: set.into_iter().collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored upper-triangle entries.
    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    /// Real parameter count.
    pub fn real_unknowns(&self) -> usize {
        self.upper.iter().map(|&(i, j)| if i == j { 1 } else { 2 }).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsqOptions {
    /// Stop once `||A^T r|| <= tolerance * ||A^T b||`.
    pub tolerance: f64,
    /// Defaults to ten times the real unknown count.
    pub max_iterations: Option<usize>,
}

impl Default for LsqOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LsqDiagnostics {
    pub converged: bool,
    pub iterations: usize,
    pub unknowns: usize,
    pub objective_seed: f64,
    pub objective: f64,
    pub gradient_ratio: f64,
}

/// Row-major `dim x m` block.
struct Block {
    m: usize,
    data: Vec<C64>,
}

impl Block {
    fn zeros(dim: usize, m: usize) -> Self {
        Self { m, data: vec![ZERO; dim * m] }
    }

    fn from_mat(w: MatRef<'_, C64>) -> Self {
        let (n, m) = (w.nrows(), w.ncols());
        let mut b = Self::zeros(n, m);
        for i in 0..n {
            for l in 0..m {
                b.data[i * m + l] = w[(i, l)];
            }
        }
        b
    }

    fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

fn sparse_apply(y: &SparseOperator, src: &Block) -> Block {
    let mut out = Block::zeros(y.dim(), src.m);
    for i in 0..y.dim() {
        let dst = &mut out.data[i * src.m..(i + 1) * src.m];
        for (j, v) in y.row(i) {
            for (d, s) in dst.iter_mut().zip(src.row(j)) {
                *d += v * s;
            }
        }
    }
    out
}

struct Problem<'a> {
    pattern: &'a [(usize, usize)],
    h: &'a SparseOperator,
    p: &'a SparseOperator,
    w: Block,
    hw: Block,
    pw: Block,
}

impl Problem<'_> {
    fn apply_n(&self, x: &[C64], src: &Block) -> Block {
        let mut out = Block::zeros(self.h.dim(), src.m);
        for (&(i, j), &z) in self.pattern.iter().zip(x) {
            if i == j {
                let (row, s) = (i * src.m, src.row(i));
                for (o, &x) in out.data[row..row + src.m].iter_mut().zip(s) {
                    *o += x * z.re;
                }
            } else {
                for l in 0..src.m {
                    let (a, b) = (src.data[j * src.m + l], src.data[i * src.m + l]);
                    out.data[i * src.m + l] += z * a;
                    out.data[j * src.m + l] += z.conj() * b;
                }
            }
        }
        out
    }

    /// `([N,H] W, [N,P] W)`.
    fn forward(&self, x: &[C64]) -> (Block, Block) {
        let nw = self.apply_n(x, &self.w);
        let mut r1 = self.apply_n(x, &self.hw);
        let mut r2 = self.apply_n(x, &self.pw);
        let hnw = sparse_apply(self.h, &nw);
        let pnw = sparse_apply(self.p, &nw);
        for (d, s) in r1.data.iter_mut().zip(&hnw.data) {
            *d -= s;
        }
        for (d, s) in r2.data.iter_mut().zip(&pnw.data) {
            *d -= s;
        }
        (r1, r2)
    }

    /// Adjoint of [`Self::forward`] under `Re tr(A^dagger B)`.
    fn adjoint(&self, r1: &Block, r2: &Block) -> Vec<C64> {
        let hr = sparse_apply(self.h, r1);
        let pr = sparse_apply(self.p, r2);
        let m = self.w.m;
        let g = |i: usize, j: usize| -> C64 {
            let mut s = ZERO;
            let (a1, a2, hq, pq) = (r1.row(i), r2.row(i), hr.row(i), pr.row(i));
            let (x1, x2, w) = (self.hw.row(j), self.pw.row(j), self.w.row(j));
            for l in 0..m {
                s += a1[l] * x1[l].conj() + a2[l] * x2[l].conj() - (hq[l] + pq[l]) * w[l].conj();
            }
            s
        };
        self.pattern
            .iter()
            .map(|&(i, j)| if i == j { C64::new(g(i, i).re, 0.0) } else { g(i, j) + g(j, i).conj() })
            .collect()
    }
}

fn dot(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Minimizes the probe-weighted closure defect over Hermitian `N` supported on
/// `pattern` plus the support of `seed`, starting from `seed`.
///
/// Reaching the iteration cap returns the best iterate with `converged = false`.
pub fn refine_boost_least_squares(
    h: &SparseOperator,
    p: &SparseOperator,
    seed: &SparseOperator,
    pattern: &BoostPattern,
    probes: MatRef<'_, C64>,
    options: LsqOptions,
) -> Result<(SparseOperator, LsqDiagnostics)> {
    check_dims(h.dim(), p.dim())?;
    check_dims(h.dim(), seed.dim())?;
    check_dims(h.dim(), pattern.dim())?;
    check_dims(h.dim(), probes.nrows())?;
    if seed.hermiticity_defect() > 1e-12 * seed.frobenius_norm().max(1.0) {
        return Err(LabError::Domain("least-squares seed is not Hermitian".into()));
    }
    let full = pattern.with_support(seed);
    let w = Block::from_mat(probes);
    let hw = sparse_apply(h, &w);
    let pw = sparse_apply(p, &w);
    let prob = Problem { pattern: &full.upper, h, p, w, hw, pw };

    // b = (iPW, iHW)
    let b1 = Block { m: prob.w.m, data: prob.pw.data.iter().map(|z| I * z).collect() };
    let b2 = Block { m: prob.w.m, data: prob.hw.data.iter().map(|z| I * z).collect() };
    let atb = prob.adjoint(&b1, &b2);
    let atb_norm = dot(&atb, &atb).sqrt();

    let mut x: Vec<C64> = full.upper.iter().map(|&(r, c)| seed.get(r, c)).collect();
    let (a1, a2) = prob.forward(&x);
    let mut r1 = Block { m: b1.m, data: b1.data.iter().zip(&a1.data).map(|(b, a)| b - a).collect() };
    let mut r2 = Block { m: b2.m, data: b2.data.iter().zip(&a2.data).map(|(b, a)| b - a).collect() };
    let objective_seed = r1.norm_sqr() + r2.norm_sqr();

    let unknowns = full.real_unknowns();
    let cap = options.max_iterations.unwrap_or(10 * unknowns);
    let threshold = options.tolerance * atb_norm;
    let mut s = prob.adjoint(&r1, &r2);
    let mut gamma = dot(&s, &s);
    let mut best = (objective_seed, x.clone());
    let mut iterations = 0;
    let mut converged = gamma.sqrt() <= threshold;
    let mut dir = s.clone();
    while !converged && iterations < cap {
        let (q1, q2) = prob.forward(&dir);
        let qq = q1.norm_sqr() + q2.norm_sqr();
        if !(qq > 0.0) {
            break;
        }
        let alpha = gamma / qq;
        for (xk, dk) in x.iter_mut().zip(&dir) {
            *xk += dk * alpha;
        }
        for (r, q) in r1.data.iter_mut().zip(&q1.data) {
            *r -= q * alpha;
        }
        for (r, q) in r2.data.iter_mut().zip(&q2.data) {
            *r -= q * alpha;
        }
        iterations += 1;
        let obj = r1.norm_sqr() + r2.norm_sqr();
        if obj < best.0 {
            best = (obj, x.clone());
        }
        s = prob.adjoint(&r1, &r2);
        let gamma_new = dot(&s, &s);
        if gamma_new.sqrt() <= threshold {
            converged = true;
            break;
        }
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        for (d, sk) in dir.iter_mut().zip(&s) {
            *d = sk + *d * beta;
        }
    }
    if converged {
        // The final iterate satisfies the stopping rule; keep it unless roundoff made it worse.
        let (f1, f2) = prob.forward(&x);
        let obj = b1.data.iter().zip(&f1.data).map(|(b, a)| (b - a).norm_sqr()).sum::<f64>()
            + b2.data.iter().zip(&f2.data).map(|(b, a)| (b - a).norm_sqr()).sum::<f64>();
        if obj <= best.0 {
            best = (obj, x.clone());
        }
    }
    let (objective, xb) = best;
    let mut t = Vec::with_capacity(2 * xb.len());
    for (&(r, c), &z) in full.upper.iter().zip(&xb) {
        if r == c {
            t.push((r, r, C64::new(z.re, 0.0)));
        } else {
            t.push((r, c, z));
            t.push((c, r, z.conj()));
        }
    }
    let gradient_ratio = if atb_norm > 0.0 { gamma.sqrt() / atb_norm } else { 0.0 };
    Ok((
        SparseOperator::from_triplets(h.dim(), t),
        LsqDiagnostics { converged, iterations, unknowns, objective_seed, objective, gradient_ratio },
    ))
}

/// Probe-weighted objective `||([N,H] - iP) W||^2 + ||([N,P] - iH) W||^2`.
pub fn lsq_objective(h: &SparseOperator, p: &SparseOperator, n: &SparseOperator, probes: MatRef<'_, C64>) -> Result<f64> {
    check_dims(h.dim(), n.dim())?;
    check_dims(h.dim(), p.dim())?;
    let w = Block::from_mat(probes);
    let mut total = 0.0;
    for (x, y) in [(h, p), (p, h)] {
        // ([N, x] - i y) W = N x W - x N W - i y W
        let xw = sparse_apply(x, &w);
        let nxw = sparse_apply(n, &xw);
        let nw = sparse_apply(n, &w);
        let xnw = sparse_apply(x, &nw);
        let yw = sparse_apply(y, &w);
        for k in 0..w.data.len() {
            total += (nxw.data[k] - xnw.data[k] - I * yw.data[k]).norm_sqr();
        }
    }
    Ok(total)
}
