use serde::{Deserialize, Serialize};

use super::model::LeeModel;
use super::states::{make_packet_phi0, make_phi0, make_psi_p};
use crate::error::{LabError, Result};
use crate::forge::{BoostConjugator, StateVector, C64};
use crate::kinematics::BoostParams;

/// Slack on `|value| <= 1` for unit-normalized bra and ket.
pub const CAUCHY_SCHWARZ_SLACK: f64 = 1e-9;

/// Complex amplitude samples on an ascending time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSeries {
    pub label: String,
    pub t_grid: Vec<f64>,
    pub values: Vec<C64>,
    /// Latest time before the finite spectrum revives, when known.
    pub recurrence_guard: Option<f64>,
}

impl AmplitudeSeries {
    pub fn new(label: impl Into<String>, t_grid: Vec<f64>, values: Vec<C64>, recurrence_guard: Option<f64>) -> Self {
        assert_eq!(t_grid.len(), values.len());
        Self { label: label.into(), t_grid, values, recurrence_guard }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn abs2(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max_t |self(t) - other(t)|` over a shared grid.
    pub fn max_deviation(&self, other: &AmplitudeSeries) -> Result<f64> {
        if self.t_grid != other.t_grid {
            return Err(LabError::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// `max_t ||self(t)|^2 - |other(t)|^2|` over a shared grid.
    pub fn max_abs2_deviation(&self, other: &AmplitudeSeries) -> Result<f64> {
        if self.t_grid != other.t_grid {
            return Err(LabError::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs())
            .fold(0.0, f64::max))
    }
}

/// `n` uniform samples on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_max > 0.0) || !t_max.is_finite() || n < 2 {
        return Err(LabError::Config(format!("time grid needs t_max > 0 and at least 2 samples, got t_max = {t_max}, samples = {n}")));
    }
    Ok((0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect())
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(LabError::Domain("time grid must be finite and strictly ascending".into()));
    }
    Ok(())
}

/// How the boosted amplitude is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// `exp(-i t (gamma H - gamma v P))` applied blockwise.
    ClosedForm,
    /// States boosted by `exp(-i beta N)`, then evolved with `H`.
    ExplicitBoost,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::ClosedForm => "closed_form",
            Route::ExplicitBoost => "explicit_boost",
        }
    }
}

fn float_tag(x: f64) -> String {
    format!("{x}")
}

/// Default series label, e.g. `V_v0.5`.
pub fn amplitude_label(v: f64, route: Route) -> String {
    match route {
        Route::ClosedForm => format!("V_v{}", float_tag(v)),
        Route::ExplicitBoost => format!("V_explicit_v{}", float_tag(v)),
    }
}

/// Default survival label, e.g. `A_p0.5`.
pub fn survival_label(p: f64) -> String {
    format!("A_p{}", float_tag(p))
}

/// `L_v psi = exp(-i beta N) psi`.
pub fn boost_state(conj: &BoostConjugator, psi: &StateVector, v: f64) -> Result<StateVector> {
    let b = BoostParams::from_velocity(v)?;
    conj.exp_apply(psi, -b.beta)
}

fn explicit_conjugator(route: Route, boost: Option<&BoostConjugator>) -> Result<Option<&BoostConjugator>> {
    match (route, boost) {
        (Route::ExplicitBoost, None) => Err(LabError::Config("explicit_boost route needs a boost generator".into())),
        (Route::ExplicitBoost, Some(c)) => Ok(Some(c)),
        (Route::ClosedForm, _) => Ok(None),
    }
}

/// `V(v, t) = <L_v phi0, exp(-i H t) L_v Phi0>`.
///
/// The closed form uses `L_v^dagger H L_v = gamma H - gamma v P` and evolves
/// each total-momentum block with its boosted generator.
pub fn amplitude_v(
    model: &LeeModel,
    boost: Option<&BoostConjugator>,
    v: f64,
    width: f64,
    t_grid: &[f64],
    route: Route,
) -> Result<AmplitudeSeries> {
    BoostParams::from_velocity(v)?;
    check_grid(t_grid)?;
    let conj = explicit_conjugator(route, boost)?;
    let phi0 = make_phi0(model.basis());
    let packet = make_packet_phi0(model.basis(), width)?;
    let overlap = match conj {
        None => model.blocks().boosted(v)?.spectral()?.overlap(&phi0, &packet)?,
        Some(c) => {
            check_dim(model, c)?;
            let bra = boost_state(c, &phi0, v)?;
            let ket = boost_state(c, &packet, v)?;
            model.spectrum().overlap(&bra, &ket)?
        }
    };
    Ok(AmplitudeSeries::new(amplitude_label(v, route), t_grid.to_vec(), overlap.series(t_grid), overlap.recurrence_guard()))
}

fn check_dim(model: &LeeModel, c: &BoostConjugator) -> Result<()> {
    if c.dim() != model.basis().len() {
        return Err(LabError::DimensionMismatch { expected: model.basis().len(), found: c.dim() });
    }
    Ok(())
}

/// `A_p(t) = <psi_p, exp(-i H t) psi_p>` inside the block of `p`.
pub fn survival_a(model: &LeeModel, p: f64, t_grid: &[f64]) -> Result<AmplitudeSeries> {
    check_grid(t_grid)?;
    let psi = make_psi_p(model.basis(), p)?;
    let overlap = model.spectrum().overlap(&psi, &psi)?;
    Ok(AmplitudeSeries::new(survival_label(p), t_grid.to_vec(), overlap.series(t_grid), overlap.recurrence_guard()))
}

/// `<psi, exp(-i H t) psi>` for an arbitrary state.
pub fn survival_of(model: &LeeModel, psi: &StateVector, label: impl Into<String>, t_grid: &[f64]) -> Result<AmplitudeSeries> {
    check_grid(t_grid)?;
    let overlap = model.spectrum().overlap(psi, psi)?;
    Ok(AmplitudeSeries::new(label, t_grid.to_vec(), overlap.series(t_grid), overlap.recurrence_guard()))
}

/// Same amplitude on the time grid scaled by `factor`, keeping the original grid.
pub fn rescaled_closed_form(model: &LeeModel, width: f64, t_grid: &[f64], factor: f64) -> Result<AmplitudeSeries> {
    let scaled: Vec<f64> = t_grid.iter().map(|t| t * factor).collect();
    let mut s = amplitude_v(model, None, 0.0, width, &scaled, Route::ClosedForm)?;
    s.t_grid = t_grid.to_vec();
    s.label = format!("V0_scaled{}", float_tag(factor));
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{MomentumGrid, ModelParams};

    fn model(g: f64) -> LeeModel {
        let p = ModelParams { m_a: 1.0, m_b: 0.4, m_c: 0.3, g, lambda_ff: 2.0 };
        LeeModel::new(&MomentumGrid::new(9, 0.25).unwrap(), &p).unwrap()
    }

    #[test]
    fn free_survival_is_a_phase() {
        let m = model(0.0);
        let t = uniform_grid(5.0, 11).unwrap();
        let s = survival_a(&m, 0.5, &t).unwrap();
        let w = 1.0f64.hypot(0.5);
        for (t, a) in s.t_grid.iter().zip(&s.values) {
            assert!((a - C64::from_polar(1.0, -w * t)).norm() < 1e-12);
        }
        assert_eq!(s.label, "A_p0.5");
    }

    #[test]
    fn speed_up_and_initial_overlap() {
        let m = model(0.05);
        let t = uniform_grid(10.0, 41).unwrap();
        let v0 = amplitude_v(&m, None, 0.0, 1.0, &t, Route::ClosedForm).unwrap();
        let phi0 = make_phi0(m.basis());
        let pk = make_packet_phi0(m.basis(), 1.0).unwrap();
        assert!((v0.values[0] - phi0.inner(&pk).unwrap()).norm() < 1e-14);
        let g = crate::kinematics::gamma_factor(0.6).unwrap();
        let v = amplitude_v(&m, None, 0.6, 1.0, &t, Route::ClosedForm).unwrap();
        let r = rescaled_closed_form(&m, 1.0, &t, g).unwrap();
        assert!(v.max_deviation(&r).unwrap() < 1e-10);
        assert!(v.max_modulus() <= 1.0 + CAUCHY_SCHWARZ_SLACK);
    }

    #[test]
    fn explicit_route_requires_generator() {
        let m = model(0.05);
        let t = uniform_grid(1.0, 3).unwrap();
        assert!(amplitude_v(&m, None, 0.2, 1.0, &t, Route::ExplicitBoost).is_err());
        assert!(amplitude_v(&m, None, 1.0, 1.0, &t, Route::ClosedForm).is_err());
        assert!(survival_a(&m, 0.3, &t).is_err());
    }
}
