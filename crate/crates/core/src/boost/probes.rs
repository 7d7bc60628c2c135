use crate::forge::{Matrix, C64};
use crate::kinematics::{BasisState, SectorBasis};

/// Number of columns returned by [`probe_states`].
pub const PROBE_COUNT: usize = 12;

/// Smooth interior-supported test states, one per column, each unit norm.
///
/// Three Gaussians in the single-particle sector and nine product Gaussians
/// in the pair sector, width `k_max / 6`, centred on `{-w, 0, w}`.
pub fn probe_states(basis: &SectorBasis) -> Matrix {
    let grid = basis.grid();
    let w = (grid.k_max() / 6.0).max(grid.dk());
    let centers = [-w, 0.0, w];
    let bump = |k: f64, c: f64| (-(k - c) * (k - c) / (2.0 * w * w)).exp();
    let mut m = Matrix::zeros(basis.len(), PROBE_COUNT);
    for (i, s) in basis.states().iter().enumerate() {
        match *s {
            BasisState::A { p } => {
                let k = grid.momentum(p);
                for (c, &x) in centers.iter().enumerate() {
                    m[(i, c)] = C64::new(bump(k, x), 0.0);
                }
            }
            BasisState::Bc { k1, k2 } => {
                let (a, b) = (grid.momentum(k1), grid.momentum(k2));
                for (c1, &x1) in centers.iter().enumerate() {
                    for (c2, &x2) in centers.iter().enumerate() {
                        m[(i, 3 + 3 * c1 + c2)] = C64::new(bump(a, x1) * bump(b, x2), 0.0);
                    }
                }
            }
        }
    }
    for c in 0..PROBE_COUNT {
        let col = m.col_as_slice_mut(c);
        let n = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in col.iter_mut() {
            *z /= n;
        }
    }
    m
}
