use rayon::prelude::*;
use serde::Serialize;

use super::amplitude::{amplitude_v, boost_state, rescaled_closed_form, survival_a, survival_of, uniform_grid, AmplitudeSeries, Route};
use super::fit::{fit_decay, DecayFit, FitOptions};
use super::model::LeeModel;
use super::states::{make_packet_phi0, make_phi0, make_psi_p};
use crate::error::{LabError, Result};
use crate::forge::{BoostConjugator, StateVector, C64};
use crate::kinematics::BoostParams;

/// Sample count of the default time grid.
pub const DEFAULT_SAMPLES: usize = 400;

/// `samples` points on `[0, min(20 / Gamma_GR, guard)]`, the guard taken from the rest block.
pub fn default_t_grid(model: &LeeModel, samples: usize) -> Result<Vec<f64>> {
    let gr = model.golden_rule()?.gamma_rate;
    let guard = model.spectrum().recurrence_guard(0);
    let t_max = match (gr > 0.0, guard) {
        (true, Some(g)) => (20.0 / gr).min(g),
        (true, None) => 20.0 / gr,
        (false, Some(g)) => g,
        (false, None) => return Err(LabError::Config("no decay width and no recurrence guard; set t_grid.t_max".into())),
    };
    uniform_grid(t_max, samples)
}

/// Speed-up check at one velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedupEntry {
    pub v: f64,
    pub gamma: f64,
    /// `max_t |V(v, t) - V(0, gamma t)|`, closed form.
    pub max_deviation: f64,
    /// `max_t ||V(v, t)|^2 - |V(0, gamma t)|^2|`, closed form.
    pub max_abs2_deviation: f64,
    pub max_modulus: f64,
    /// `max_t |V_explicit(v, t) - V_closed(v, t)|` when a boost generator is supplied.
    pub explicit_deviation: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SpeedupRun {
    pub entries: Vec<SpeedupEntry>,
    pub series: Vec<AmplitudeSeries>,
}

pub fn speedup_experiment(
    model: &LeeModel,
    boost: Option<&BoostConjugator>,
    velocities: &[f64],
    width: f64,
    t_grid: &[f64],
) -> Result<SpeedupRun> {
    let cells: Vec<Result<(SpeedupEntry, Vec<AmplitudeSeries>)>> = velocities
        .par_iter()
        .map(|&v| {
            let b = BoostParams::from_velocity(v)?;
            let closed = amplitude_v(model, None, v, width, t_grid, Route::ClosedForm)?;
            let rest = rescaled_closed_form(model, width, t_grid, b.gamma)?;
            let mut series = vec![closed.clone()];
            let explicit_deviation = match boost {
                Some(c) => {
                    let e = amplitude_v(model, Some(c), v, width, t_grid, Route::ExplicitBoost)?;
                    let d = e.max_deviation(&closed)?;
                    series.push(e);
                    Some(d)
                }
                None => None,
            };
            let entry = SpeedupEntry {
                v,
                gamma: b.gamma,
                max_deviation: closed.max_deviation(&rest)?,
                max_abs2_deviation: closed.max_abs2_deviation(&rest)?,
                max_modulus: closed.max_modulus(),
                explicit_deviation,
            };
            Ok((entry, series))
        })
        .collect();
    let mut run = SpeedupRun { entries: Vec::new(), series: Vec::new() };
    for c in cells {
        let (e, s) = c?;
        run.entries.push(e);
        run.series.extend(s);
    }
    Ok(run)
}

/// One momentum of the dilation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DilationEntry {
    pub p: f64,
    pub fit: DecayFit,
    /// `sqrt(p^2 + m^2) / m` with `m` fitted at rest.
    pub gamma_m: f64,
    /// Same with the bare mass `m_a`.
    pub gamma_m_bare: f64,
    /// `Gamma_p gamma_m / Gamma_0`.
    pub ratio: f64,
    pub ratio_bare: f64,
    /// `max ||A_p(t)|^2 - |A_0(t / gamma_m)|^2|` over the fit window of `p`.
    pub curve_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DilationReport {
    pub rest: DecayFit,
    pub entries: Vec<DilationEntry>,
    /// Every fit reached `min_r_squared`.
    pub fit_quality_ok: bool,
    #[serde(skip)]
    pub series: Vec<AmplitudeSeries>,
}

pub fn check_dilation(model: &LeeModel, p_list: &[f64], t_grid: &[f64], opts: &FitOptions) -> Result<DilationReport> {
    let a0 = survival_a(model, 0.0, t_grid)?;
    let rest = fit_decay(&a0, opts)?;
    let m_a = model.params().m_a;
    let cells: Vec<Result<(DilationEntry, AmplitudeSeries)>> = p_list
        .par_iter()
        .map(|&p| {
            let tick = model.grid().tick_of(p)?;
            let gamma_m = (p * p + rest.m_eff * rest.m_eff).sqrt() / rest.m_eff;
            let gamma_m_bare = (p * p + m_a * m_a).sqrt() / m_a;
            if tick == 0 {
                let entry = DilationEntry { p, fit: rest, gamma_m: 1.0, gamma_m_bare: 1.0, ratio: 1.0, ratio_bare: 1.0, curve_deviation: 0.0 };
                return Ok((entry, a0.clone()));
            }
            let ap = survival_a(model, p, t_grid)?;
            let fit = fit_decay(&ap, opts)?;
            let window: Vec<usize> = (0..ap.len()).filter(|&i| ap.t_grid[i] >= fit.window[0] && ap.t_grid[i] <= fit.window[1]).collect();
            let scaled: Vec<f64> = window.iter().map(|&i| ap.t_grid[i] / gamma_m).collect();
            let rest_scaled = survival_a(model, 0.0, &scaled)?;
            let curve_deviation = window
                .iter()
                .zip(&rest_scaled.values)
                .map(|(&i, r)| (ap.values[i].norm_sqr() - r.norm_sqr()).abs())
                .fold(0.0, f64::max);
            let entry = DilationEntry {
                p,
                fit,
                gamma_m,
                gamma_m_bare,
                ratio: fit.gamma_rate * gamma_m / rest.gamma_rate,
                ratio_bare: fit.gamma_rate * gamma_m_bare / rest.gamma_rate,
                curve_deviation,
            };
            Ok((entry, ap))
        })
        .collect();
    let mut entries = Vec::with_capacity(p_list.len());
    let mut series = vec![a0.clone()];
    for c in cells {
        let (e, s) = c?;
        if e.p != 0.0 {
            series.push(s);
        }
        entries.push(e);
    }
    let fit_quality_ok = rest.r_squared >= opts.min_r_squared && entries.iter().all(|e| e.fit.r_squared >= opts.min_r_squared);
    Ok(DilationReport { rest, entries, fit_quality_ok, series })
}

/// Boosted energy and momentum averages of `phi0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub v: f64,
    pub gamma: f64,
    pub route: Route,
    pub avg_p: f64,
    pub avg_e: f64,
    /// `|avg_P| / avg_E`.
    pub ratio: f64,
}

fn expectation(op: &crate::forge::SparseOperator, psi: &StateVector) -> f64 {
    let y = op.mul_vec(psi.amplitudes());
    psi.amplitudes().iter().zip(&y).fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a.conj() * b).re
}

pub fn boosted_moments(model: &LeeModel, boost: Option<&BoostConjugator>, v: f64, route: Route) -> Result<Moments> {
    let b = BoostParams::from_velocity(v)?;
    let h = model.hamiltonian_sparse();
    let p = model.momentum_sparse();
    let phi0 = make_phi0(model.basis());
    let (avg_p, avg_e) = match (route, boost) {
        (Route::ClosedForm, _) => {
            let (eh, ep) = (expectation(&h, &phi0), expectation(&p, &phi0));
            (b.gamma * ep - b.gamma * b.v * eh, b.gamma * eh - b.gamma * b.v * ep)
        }
        (Route::ExplicitBoost, Some(c)) => {
            let psi = boost_state(c, &phi0, v)?;
            (expectation(&p, &psi), expectation(&h, &psi))
        }
        (Route::ExplicitBoost, None) => return Err(LabError::Config("explicit_boost route needs a boost generator".into())),
    };
    Ok(Moments { v, gamma: b.gamma, route, avg_p, avg_e, ratio: avg_p.abs() / avg_e })
}

#[derive(Debug, Clone, Serialize)]
pub struct MixtureReport {
    pub v: f64,
    pub gamma: f64,
    /// Grid mode nearest `gamma v m_a`.
    pub p: f64,
    /// Amplitudes of `Phi_v` and `psi_p` in the superposition.
    pub weights: [[f64; 2]; 2],
    pub fit_fast: DecayFit,
    pub fit_slow: DecayFit,
    /// `Gamma_fast / Gamma_slow`.
    pub rate_ratio: f64,
    pub gamma_squared: f64,
    #[serde(skip)]
    pub series: Vec<AmplitudeSeries>,
}

/// Superposition `w_0 Phi_v + w_1 psi_p`; the fast component is fitted on the
/// closed-form `V(v, t)` and the slow one on `A_p(t)`.
pub fn mixture_experiment(
    model: &LeeModel,
    boost: Option<&BoostConjugator>,
    v: f64,
    weights: [C64; 2],
    width: f64,
    t_grid: &[f64],
    opts: &FitOptions,
) -> Result<MixtureReport> {
    let b = BoostParams::from_velocity(v)?;
    let wn = weights[0].norm_sqr() + weights[1].norm_sqr();
    if (wn - 1.0).abs() > 1e-12 {
        return Err(LabError::Domain(format!("mixture weights must be normalized, |w0|^2 + |w1|^2 = {wn}")));
    }
    let grid = model.grid();
    let p = grid.momentum(grid.nearest_tick(b.gamma * b.v * model.params().m_a));
    let fast = amplitude_v(model, None, v, width, t_grid, Route::ClosedForm)?;
    let slow = survival_a(model, p, t_grid)?;
    let fit_fast = fit_decay(&fast, opts)?;
    let fit_slow = fit_decay(&slow, opts)?;
    let mut series = vec![fast, slow];
    if let Some(c) = boost {
        let phi_v = boost_state(c, &make_packet_phi0(model.basis(), width)?, v)?;
        let psi = make_psi_p(model.basis(), p)?;
        let mix = StateVector::superpose(weights[0], &phi_v, weights[1], &psi)?;
        series.push(survival_of(model, &mix, format!("mix_v{v}"), t_grid)?);
    }
    Ok(MixtureReport {
        v,
        gamma: b.gamma,
        p,
        weights: [[weights[0].re, weights[0].im], [weights[1].re, weights[1].im]],
        fit_fast,
        fit_slow,
        rate_ratio: fit_fast.gamma_rate / fit_slow.gamma_rate,
        gamma_squared: b.gamma * b.gamma,
        series,
    })
}
