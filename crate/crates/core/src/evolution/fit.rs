use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::amplitude::AmplitudeSeries;
use crate::error::{LabError, Result};

/// Minimum series length accepted by [`fit_decay`].
pub const MIN_SERIES_SAMPLES: usize = 20;

/// Exponential-window thresholds on `|A(t)|^2 / |A(0)|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    pub abs2_lo: f64,
    pub abs2_hi: f64,
    pub min_r_squared: f64,
    /// Fewest samples an admissible window may hold.
    pub min_window_samples: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { abs2_lo: 0.05, abs2_hi: 0.9, min_r_squared: 0.999, min_window_samples: 5 }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.abs2_lo && self.abs2_lo < self.abs2_hi && self.abs2_hi <= 1.0) {
            return Err(LabError::Config(format!(
                "fit thresholds need 0 < abs2_lo < abs2_hi <= 1, got {} and {}",
                self.abs2_lo, self.abs2_hi
            )));
        }
        if !(0.0..=1.0).contains(&self.min_r_squared) {
            return Err(LabError::Config(format!("min_r_squared must lie in [0, 1], got {}", self.min_r_squared)));
        }
        if self.min_window_samples < 2 {
            return Err(LabError::Config("min_window_samples must be at least 2".into()));
        }
        Ok(())
    }
}

/// `A(t) ~ exp(-i m t - Gamma t / 2)` fitted over the window `[t1, t2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub m_eff: f64,
    pub gamma_rate: f64,
    pub window: [f64; 2],
    /// Quality of the `ln |A|^2` regression.
    pub r_squared: f64,
    /// Quality of the phase regression.
    pub phase_r_squared: f64,
    pub recurrence_guard: Option<f64>,
    pub samples: usize,
}

struct Line {
    slope: f64,
    r_squared: f64,
}

fn regress(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let ss_res = y.iter().zip(x).map(|(b, a)| (b - my - slope * (a - mx)).powi(2)).sum::<f64>();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Line { slope, r_squared }
}

fn unwrap_phases(series: &AmplitudeSeries, end: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(end + 1);
    let mut prev = series.values[0].arg();
    let mut offset = 0.0;
    out.push(prev);
    for z in &series.values[1..=end] {
        let a = z.arg();
        let mut d = a - prev;
        while d > PI {
            d -= 2.0 * PI;
            offset -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
            offset += 2.0 * PI;
        }
        out.push(a + offset);
        prev = a;
    }
    out
}

/// Largest contiguous index range inside the thresholds and the guard.
fn select_window(norm_abs2: &[f64], t_grid: &[f64], guard: Option<f64>, opts: &FitOptions) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut start: Option<usize> = None;
    let admissible = |i: usize| {
        let a = norm_abs2[i];
        a >= opts.abs2_lo && a <= opts.abs2_hi && guard.is_none_or(|g| t_grid[i] <= g)
    };
    for i in 0..=norm_abs2.len() {
        if i < norm_abs2.len() && admissible(i) {
            start.get_or_insert(i);
            continue;
        }
        if let Some(s) = start.take() {
            let e = i - 1;
            if best.is_none_or(|(bs, be)| e - s > be - bs) {
                best = Some((s, e));
            }
        }
    }
    best
}

/// Exponential fit of a decaying amplitude.
///
/// `|A|^2` is normalized by its first sample before windowing, so series
/// whose bra and ket overlap only partially at `t = 0` are handled alike.
pub fn fit_decay(series: &AmplitudeSeries, opts: &FitOptions) -> Result<DecayFit> {
    opts.validate()?;
    if series.len() < MIN_SERIES_SAMPLES {
        return Err(LabError::Fit(format!(
            "series {} has {} samples; at least {MIN_SERIES_SAMPLES} are needed",
            series.label,
            series.len()
        )));
    }
    let abs2 = series.abs2();
    if !(abs2[0] > 0.0) {
        return Err(LabError::Fit(format!("series {} starts at zero amplitude", series.label)));
    }
    let norm: Vec<f64> = abs2.iter().map(|a| a / abs2[0]).collect();
    let guard = series.recurrence_guard;
    let Some((s, e)) = select_window(&norm, &series.t_grid, guard, opts) else {
        let last = series.t_grid.iter().zip(&norm).rfind(|(t, _)| guard.is_none_or(|g| **t <= g));
        let detail = last.map_or(String::new(), |(t, a)| format!("; normalized |A|^2 = {a:.4} at t = {t:.4}"));
        return Err(LabError::Fit(format!(
            "series {}: no admissible window with {} <= |A|^2 <= {} before the recurrence guard {}{detail}; \
             extend t_max or increase g",
            series.label,
            opts.abs2_lo,
            opts.abs2_hi,
            guard.map_or("none".into(), |g| format!("{g:.4}")),
        )));
    };
    let count = e - s + 1;
    if count < opts.min_window_samples {
        return Err(LabError::Fit(format!(
            "series {}: admissible window [{:.4}, {:.4}] holds {count} samples, fewer than {}; refine the t-grid",
            series.label, series.t_grid[s], series.t_grid[e], opts.min_window_samples
        )));
    }
    let t = &series.t_grid[s..=e];
    let log_abs2: Vec<f64> = norm[s..=e].iter().map(|a| a.ln()).collect();
    let decay = regress(t, &log_abs2);
    if !(decay.slope < 0.0) {
        return Err(LabError::Fit(format!("series {}: |A|^2 does not decrease across the window", series.label)));
    }
    let phases = unwrap_phases(series, e);
    let phase = regress(t, &phases[s..=e]);
    Ok(DecayFit {
        m_eff: -phase.slope,
        gamma_rate: -decay.slope,
        window: [t[0], t[count - 1]],
        r_squared: decay.r_squared,
        phase_r_squared: phase.r_squared,
        recurrence_guard: guard,
        samples: count,
    })
}
