//! Relativistic kinematics and the discrete momentum lattice.
//!
//! Momenta are stored as integer *ticks* (multiples of the lattice spacing)
//! so that total-momentum bookkeeping is exact: `BC(k1, k2)` and `A(k1 + k2)`
//! land in the same block without any floating-point comparison.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Rapidity `beta = atanh(v)`.
pub fn rapidity_from_velocity(v: f64) -> Result<f64> {
    check_velocity(v)?;
    Ok(v.atanh())
}

/// Lorentz factor `(1 - v^2)^(-1/2)`.
pub fn gamma_factor(v: f64) -> Result<f64> {
    check_velocity(v)?;
    Ok(1.0 / (1.0 - v * v).sqrt())
}

/// Relativistic dispersion `sqrt(m^2 + k^2)`.
pub fn dispersion(m: f64, k: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(LabError::Domain(format!("mass must be positive, got {m}")));
    }
    Ok(m.hypot(k))
}

/// Relativistic velocity addition `(v1 + v2) / (1 + v1 v2)`.
pub fn compose_velocities(v1: f64, v2: f64) -> Result<f64> {
    check_velocity(v1)?;
    check_velocity(v2)?;
    Ok((v1 + v2) / (1.0 + v1 * v2))
}

pub(crate) fn check_velocity(v: f64) -> Result<()> {
    if !(v.abs() < 1.0) {
        return Err(LabError::Domain(format!(
            "velocity must satisfy |v| < 1, got {v}"
        )));
    }
    Ok(())
}

/// Boost parameters: velocity, rapidity and Lorentz factor of one boost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostParams {
    pub v: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl BoostParams {
    pub fn from_velocity(v: f64) -> Result<Self> {
        Ok(Self {
            v,
            beta: rapidity_from_velocity(v)?,
            gamma: gamma_factor(v)?,
        })
    }

    pub fn from_rapidity(beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(LabError::Domain(format!("rapidity must be finite, got {beta}")));
        }
        let v = beta.tanh();
        if v.abs() >= 1.0 {
            return Err(LabError::Domain(format!(
                "rapidity {beta} saturates to light speed in f64"
            )));
        }
        Ok(Self { v, beta, gamma: beta.cosh() })
    }

    /// `sinh(beta) = v * gamma`.
    pub fn sinh(&self) -> f64 {
        self.v * self.gamma
    }
}

/// Symmetric, uniformly spaced momentum modes `k_j = (j - (n-1)/2) dk`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    n_modes: usize,
    dk: f64,
    modes: Vec<f64>,
}

impl MomentumGrid {
    /// Build a grid; `n_modes` must be odd so that `k = 0` is a mode.
    pub fn new(n_modes: usize, dk: f64) -> Result<Self> {
        if n_modes == 0 || n_modes.is_multiple_of(2) {
            return Err(LabError::Config(format!(
                "n_modes must be a positive odd integer, got {n_modes}"
            )));
        }
        if !(dk > 0.0) || !dk.is_finite() {
            return Err(LabError::Config(format!("dk must be positive, got {dk}")));
        }
        let half = ((n_modes - 1) / 2) as i64;
        let modes = (-half..=half).map(|t| t as f64 * dk).collect();
        Ok(Self { n_modes, dk, modes })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dk(&self) -> f64 {
        self.dk
    }

    pub fn modes(&self) -> &[f64] {
        &self.modes
    }

    /// Largest tick; modes run over `-half..=half`.
    pub fn half(&self) -> i64 {
        ((self.n_modes - 1) / 2) as i64
    }

    pub fn k_max(&self) -> f64 {
        self.half() as f64 * self.dk
    }

    pub fn momentum(&self, tick: i64) -> f64 {
        tick as f64 * self.dk
    }

    pub fn contains_tick(&self, tick: i64) -> bool {
        tick.abs() <= self.half()
    }

    /// Position of a tick in `modes`.
    pub fn mode_index(&self, tick: i64) -> Option<usize> {
        self.contains_tick(tick).then(|| (tick + self.half()) as usize)
    }

    /// Tick of a momentum value that lies on the grid.
    pub fn tick_of(&self, k: f64) -> Result<i64> {
        let raw = (k / self.dk).round();
        let tick = raw as i64;
        let on_grid = (k - raw * self.dk).abs() <= 1e-9 * self.dk;
        if on_grid && self.contains_tick(tick) {
            return Ok(tick);
        }
        let nearest = |t: i64| self.momentum(t.clamp(-self.half(), self.half()));
        let lo = nearest((k / self.dk).floor() as i64);
        let hi = nearest((k / self.dk).ceil() as i64);
        Err(LabError::Domain(format!(
            "momentum {k} is not a grid mode (dk = {}, k_max = {}); nearest modes: {lo}, {hi}",
            self.dk,
            self.k_max()
        )))
    }

    /// Tick of the grid mode closest to `k` (clamped to the grid).
    pub fn nearest_tick(&self, k: f64) -> i64 {
        ((k / self.dk).round() as i64).clamp(-self.half(), self.half())
    }
}

/// Rest masses, coupling and form-factor width of the decay model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub m_a: f64,
    pub m_b: f64,
    pub m_c: f64,
    pub g: f64,
    pub lambda_ff: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, m) in [("m_a", self.m_a), ("m_b", self.m_b), ("m_c", self.m_c)] {
            if !(m > 0.0) || !m.is_finite() {
                return Err(LabError::Config(format!("{name} must be positive, got {m}")));
            }
        }
        if !(self.g >= 0.0) || !self.g.is_finite() {
            return Err(LabError::Config(format!("g must be >= 0, got {}", self.g)));
        }
        if !(self.lambda_ff > 0.0) || !self.lambda_ff.is_finite() {
            return Err(LabError::Config(format!(
                "lambda_ff must be positive, got {}",
                self.lambda_ff
            )));
        }
        if self.m_a <= self.m_b + self.m_c {
            return Err(LabError::Config(format!(
                "decay channel closed: m_a = {} <= m_b + m_c = {}",
                self.m_a,
                self.m_b + self.m_c
            )));
        }
        Ok(())
    }

    /// Same parameters with a different coupling (e.g. the free theory `g = 0`).
    pub fn with_coupling(&self, g: f64) -> Self {
        Self { g, ..*self }
    }
}

/// One basis label of the single-excitation sector, momenta in ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisState {
    /// One `a` particle with momentum `p`.
    A { p: i64 },
    /// A `b` particle with `k1` and a `c` particle with `k2`.
    Bc { k1: i64, k2: i64 },
}

impl BasisState {
    pub fn total_tick(&self) -> i64 {
        match *self {
            BasisState::A { p } => p,
            BasisState::Bc { k1, k2 } => k1 + k2,
        }
    }
}

/// Enumeration of `|a, p>` and `|b k1, c k2>` states with total-momentum blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    grid: MomentumGrid,
    states: Vec<BasisState>,
    block_index: BTreeMap<i64, Vec<usize>>,
}

impl SectorBasis {
    /// All `A` states in grid order, then `BC` states in lexicographic `(k1, k2)` order.
    pub fn enumerate(grid: &MomentumGrid) -> Self {
        let half = grid.half();
        let n = grid.n_modes();
        let mut states = Vec::with_capacity(n + n * n);
        states.extend((-half..=half).map(|p| BasisState::A { p }));
        for k1 in -half..=half {
            states.extend((-half..=half).map(|k2| BasisState::Bc { k1, k2 }));
        }
        let mut block_index: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, s) in states.iter().enumerate() {
            block_index.entry(s.total_tick()).or_default().push(i);
        }
        Self { grid: grid.clone(), states, block_index }
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> BasisState {
        self.states[i]
    }

    /// Map from total-momentum tick to the indices sharing it.
    pub fn block_index(&self) -> &BTreeMap<i64, Vec<usize>> {
        &self.block_index
    }

    pub fn block(&self, total_tick: i64) -> &[usize] {
        self.block_index.get(&total_tick).map_or(&[], Vec::as_slice)
    }

    /// Exact total momentum of state `i` (computed from its tick total).
    pub fn total_momentum(&self, i: usize) -> f64 {
        self.grid.momentum(self.states[i].total_tick())
    }

    pub fn a_index(&self, p: i64) -> Option<usize> {
        self.grid.mode_index(p)
    }

    pub fn bc_index(&self, k1: i64, k2: i64) -> Option<usize> {
        let n = self.grid.n_modes();
        let i1 = self.grid.mode_index(k1)?;
        let i2 = self.grid.mode_index(k2)?;
        Some(n + i1 * n + i2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn rapidity_examples() {
        assert_eq!(rapidity_from_velocity(0.0).unwrap(), 0.0);
        assert_relative_eq!(rapidity_from_velocity(0.6).unwrap(), 2f64.ln(), epsilon = 1e-15);
        let err = rapidity_from_velocity(1.0).unwrap_err();
        assert!(err.to_string().contains('1'), "{err}");
        assert!(rapidity_from_velocity(-0.3).unwrap() < 0.0);
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_factor(0.0).unwrap(), 1.0);
        assert_relative_eq!(gamma_factor(0.6).unwrap(), 1.25, epsilon = 1e-15);
        assert_relative_eq!(gamma_factor(0.8).unwrap(), 5.0 / 3.0, epsilon = 1e-15);
        assert!(gamma_factor(-1.5).is_err());
    }

    #[test]
    fn dispersion_examples() {
        assert_eq!(dispersion(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(dispersion(3.0, 4.0).unwrap(), 5.0);
        assert_eq!(dispersion(1.0, -2.0).unwrap(), dispersion(1.0, 2.0).unwrap());
        assert!(dispersion(0.0, 1.0).is_err());
    }

    #[test]
    fn grid_examples() {
        let g = MomentumGrid::new(3, 0.5).unwrap();
        assert_eq!(g.modes(), &[-0.5, 0.0, 0.5]);
        assert_eq!(MomentumGrid::new(1, 1.0).unwrap().modes(), &[0.0]);
        assert!(matches!(MomentumGrid::new(4, 0.5), Err(LabError::Config(_))));
        assert!(MomentumGrid::new(3, 0.0).is_err());
        assert!(MomentumGrid::new(3, -1.0).is_err());
    }

    #[test]
    fn grid_tick_lookup() {
        let g = MomentumGrid::new(41, 0.25).unwrap();
        assert_eq!(g.tick_of(0.5).unwrap(), 2);
        assert_eq!(g.tick_of(-5.0).unwrap(), -20);
        let err = g.tick_of(5.25).unwrap_err().to_string();
        assert!(err.contains("nearest modes"), "{err}");
        assert!(g.tick_of(0.3).is_err());
        assert_eq!(g.nearest_tick(4.0 / 3.0), 5);
    }

    #[test]
    fn basis_counting() {
        let g = MomentumGrid::new(3, 0.5).unwrap();
        let b = SectorBasis::enumerate(&g);
        assert_eq!(b.len(), 12);
        let zero: Vec<_> = b.block(0).iter().map(|&i| b.state(i)).collect();
        assert_eq!(
            zero,
            vec![
                BasisState::A { p: 0 },
                BasisState::Bc { k1: -1, k2: 1 },
                BasisState::Bc { k1: 0, k2: 0 },
                BasisState::Bc { k1: 1, k2: -1 },
            ]
        );
        let one = SectorBasis::enumerate(&MomentumGrid::new(1, 1.0).unwrap());
        assert_eq!(one.states(), &[BasisState::A { p: 0 }, BasisState::Bc { k1: 0, k2: 0 }]);
        assert_eq!(one.block(0), &[0, 1]);
    }

    #[test]
    fn basis_index_maps_round_trip() {
        let g = MomentumGrid::new(5, 0.3).unwrap();
        let b = SectorBasis::enumerate(&g);
        for (i, s) in b.states().iter().enumerate() {
            let j = match *s {
                BasisState::A { p } => b.a_index(p),
                BasisState::Bc { k1, k2 } => b.bc_index(k1, k2),
            };
            assert_eq!(j, Some(i));
        }
        assert_eq!(b.a_index(3), None);
    }

    #[test]
    fn boost_params_consistent() {
        let b = BoostParams::from_velocity(0.8).unwrap();
        assert_relative_eq!(b.gamma, b.beta.cosh(), max_relative = 1e-12);
        assert_relative_eq!(b.sinh(), b.beta.sinh(), max_relative = 1e-12);
        let r = BoostParams::from_rapidity(b.beta).unwrap();
        assert_relative_eq!(r.v, 0.8, max_relative = 1e-14);
    }

    #[test]
    fn model_params_validation() {
        let ok = ModelParams { m_a: 1.0, m_b: 0.4, m_c: 0.3, g: 0.05, lambda_ff: 2.0 };
        ok.validate().unwrap();
        let closed = ModelParams { m_a: 0.5, ..ok };
        assert!(closed.validate().unwrap_err().to_string().contains("decay channel closed"));
        assert!(ModelParams { g: -1.0, ..ok }.validate().is_err());
        assert!(ModelParams { lambda_ff: 0.0, ..ok }.validate().is_err());
    }

    proptest! {
        #[test]
        fn hyperbolic_identities(v in -0.999f64..0.999) {
            let beta = rapidity_from_velocity(v).unwrap();
            let gamma = gamma_factor(v).unwrap();
            prop_assert!((beta.cosh() - gamma).abs() <= 1e-12 * gamma);
            prop_assert!((beta.sinh() - v * gamma).abs() <= 1e-12 * gamma);
            prop_assert_eq!(gamma, gamma_factor(-v).unwrap());
        }

        #[test]
        fn dispersion_mass_shell(m in 0.05f64..5.0, n in 0usize..30, dk in 0.01f64..1.0) {
            let g = MomentumGrid::new(2 * n + 1, dk).unwrap();
            for &k in g.modes() {
                let e = dispersion(m, k).unwrap();
                prop_assert!(e >= m);
                prop_assert!((e * e - k * k - m * m).abs() <= 1e-12 * (e * e));
            }
        }

        #[test]
        fn grid_invariants(n in 0usize..40, dk in 1e-3f64..2.0) {
            let g = MomentumGrid::new(2 * n + 1, dk).unwrap();
            let m = g.modes();
            prop_assert_eq!(m[n], 0.0);
            for j in 0..m.len() {
                prop_assert_eq!(m[j], -m[m.len() - 1 - j]);
            }
            for w in m.windows(2) {
                prop_assert!(w[1] > w[0]);
                prop_assert!(((w[1] - w[0]) - dk).abs() <= 1e-12 * dk.max(g.k_max()));
            }
        }

        #[test]
        fn basis_pure_and_partitioned(n in 0usize..8) {
            let g = MomentumGrid::new(2 * n + 1, 0.25).unwrap();
            let a = SectorBasis::enumerate(&g);
            let b = SectorBasis::enumerate(&g);
            prop_assert_eq!(&a, &b);
            let nm = g.n_modes();
            prop_assert_eq!(a.len(), nm + nm * nm);
            let total: usize = a.block_index().values().map(Vec::len).sum();
            prop_assert_eq!(total, a.len());
            for (&tick, idx) in a.block_index() {
                for &i in idx {
                    prop_assert_eq!(a.state(i).total_tick(), tick);
                }
            }
        }
    }
}
