//! Fine lattice close to the continuum limit, `dk = 0.005` out to `k_max = 3`.
//!
//! Only the momentum blocks the checks touch are assembled. The reference
//! lattice is too coarse for an exponential window before the recurrence
//! guard; here the guard sits at `t ~ 670`, about ten lifetimes.

mod common;

use std::sync::OnceLock;

use speedup_lab::evolution::{
    check_dilation, fit_decay, mixture_experiment, speedup_experiment, survival_a, uniform_grid, FitOptions, LeeModel,
};
use speedup_lab::forge::C64;
use speedup_lab::kinematics::{ModelParams, MomentumGrid};

const PARAMS: ModelParams = ModelParams { m_a: 1.0, m_b: 0.2, m_c: 0.2, g: 0.07, lambda_ff: 10.0 };
const DK: f64 = 0.005;
/// p = 0, 0.5, 1.0, -0.5 and the grid mode nearest gamma v m_a at v = 0.8.
const TICKS: [i64; 5] = [0, 100, 200, -100, 267];

struct Fixture {
    model: LeeModel,
    t: Vec<f64>,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let grid = MomentumGrid::new(1201, DK).unwrap();
        let model = LeeModel::with_blocks(&grid, &PARAMS, &TICKS).unwrap();
        let guard = model.spectrum().recurrence_guard(0).unwrap();
        let t = uniform_grid(guard, 2000).unwrap();
        Fixture { model, t }
    })
}

#[test]
fn rest_decay_matches_golden_rule_and_mass() {
    let f = fixture();
    let fit = fit_decay(&survival_a(&f.model, 0.0, &f.t).unwrap(), &FitOptions::default()).unwrap();
    let oracle = common::golden_rule_oracle(&PARAMS);
    let rel = (fit.gamma_rate - oracle).abs() / oracle;
    eprintln!("Gamma_0 = {:.6e}, Gamma_GR = {oracle:.6e}, rel = {rel:.4}, r2 = {:.6}, m_eff = {:.6}", fit.gamma_rate, fit.r_squared, fit.m_eff);
    assert!(fit.r_squared >= 0.999);
    assert!(rel <= 0.10);
    assert!((fit.m_eff - PARAMS.m_a).abs() / PARAMS.m_a <= 0.02);
    let shifted = common::perturbative_mass(&PARAMS, 3.0, 100_000);
    assert!((fit.m_eff - shifted).abs() <= 1e-3, "m_eff {} vs second order {shifted}", fit.m_eff);
    let lib = f.model.golden_rule().unwrap().gamma_rate;
    assert!((lib - oracle).abs() <= 1e-6 * oracle);
}

#[test]
fn dilation_ratios_hold_near_the_continuum() {
    let f = fixture();
    let d = check_dilation(&f.model, &[0.5, 1.0, -0.5], &f.t, &FitOptions::default()).unwrap();
    assert!(d.fit_quality_ok);
    for e in &d.entries {
        eprintln!("p = {}: ratio {:.5}, bare {:.5}, r2 {:.6}, curve deviation {:.4}", e.p, e.ratio, e.ratio_bare, e.fit.r_squared, e.curve_deviation);
        assert!((e.ratio - 1.0).abs() <= 0.05, "p = {}: ratio {}", e.p, e.ratio);
    }
    let ratio = |p: f64| d.entries.iter().find(|e| e.p == p).unwrap().ratio;
    assert!((ratio(0.5) - ratio(-0.5)).abs() <= 1e-9);
}

#[test]
fn speed_up_is_exact_on_the_fine_lattice() {
    let f = fixture();
    let run = speedup_experiment(&f.model, None, &[0.2, 0.5, 0.8], 0.02, &f.t).unwrap();
    for e in &run.entries {
        assert!(e.max_deviation <= 1e-10, "v = {}: {}", e.v, e.max_deviation);
        assert!(e.max_modulus <= 1.0 + 1e-9);
    }
}

#[test]
fn mixture_fast_over_slow_tracks_gamma_squared() {
    let f = fixture();
    let w = [C64::new(0.5f64.sqrt(), 0.0); 2];
    let m = mixture_experiment(&f.model, None, 0.8, w, 0.02, &f.t, &FitOptions::default()).unwrap();
    let rel = (m.rate_ratio - m.gamma_squared).abs() / m.gamma_squared;
    eprintln!("p = {}, Gamma_fast / Gamma_slow = {:.4}, gamma^2 = {:.4}, rel = {rel:.4}", m.p, m.rate_ratio, m.gamma_squared);
    assert_eq!(f.model.grid().tick_of(m.p).unwrap(), 267);
    assert!(rel <= 0.25);
}
