#![allow(dead_code)]

use std::path::PathBuf;

use speedup_lab::cli::{load_config, RunConfig};
use speedup_lab::kinematics::ModelParams;

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn reference_config_path() -> PathBuf {
    workspace_root().join("configs/reference.json")
}

pub fn reference_config() -> RunConfig {
    load_config(&reference_config_path()).expect("reference config")
}

pub fn reference_params() -> ModelParams {
    ModelParams { m_a: 1.0, m_b: 0.4, m_c: 0.3, g: 0.05, lambda_ff: 2.0 }
}

fn omega(m: f64, k: f64) -> f64 {
    (m * m + k * k).sqrt()
}

/// Root of `w_b(k) + w_c(k) = m_a` on `k > 0` by bisection.
pub fn resonant_momentum(p: &ModelParams) -> f64 {
    let f = |k: f64| omega(p.m_b, k) + omega(p.m_c, k) - p.m_a;
    let (mut lo, mut hi) = (0.0, p.m_a);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Continuum golden rule for `a` at rest: both pair directions `k = +-k*`
/// contribute `2 pi |g chi chi / sqrt(8 w_a w_b w_c)|^2 / |dE/dk|`.
pub fn golden_rule_oracle(p: &ModelParams) -> f64 {
    let k = resonant_momentum(p);
    let chi = (-k * k / (2.0 * p.lambda_ff * p.lambda_ff)).exp();
    let vertex2 = (p.g * chi * chi).powi(2) / (8.0 * p.m_a * omega(p.m_b, k) * omega(p.m_c, k));
    let h = 1e-6;
    let de = (omega(p.m_b, k + h) + omega(p.m_c, k + h) - omega(p.m_b, k - h) - omega(p.m_c, k - h)) / (2.0 * h);
    2.0 * 2.0 * std::f64::consts::PI * vertex2 / de
}

/// Second-order level shift of `a` at rest,
/// `m_a + PV int dk |g chi chi|^2 / (8 m_a w_b w_c (m_a - E(k)))` over `|k| <= k_max`.
///
/// The pole at `k*` is subtracted and integrated in closed form; the smooth
/// remainder uses the midpoint rule with `n` cells per half line.
pub fn perturbative_mass(p: &ModelParams, k_max: f64, n: usize) -> f64 {
    let f = |k: f64| {
        let chi = (-k * k / (2.0 * p.lambda_ff * p.lambda_ff)).exp();
        (p.g * chi * chi).powi(2) / (8.0 * p.m_a * omega(p.m_b, k) * omega(p.m_c, k))
    };
    let e = |k: f64| omega(p.m_b, k) + omega(p.m_c, k);
    let ks = resonant_momentum(p);
    let de = ks / omega(p.m_b, ks) + ks / omega(p.m_c, ks);
    let c = -f(ks) / de;
    let h = k_max / n as f64;
    let mut s = 0.0;
    for j in 0..n {
        let k = (j as f64 + 0.5) * h;
        s += (f(k) / (p.m_a - e(k)) - c / (k - ks)) * h;
    }
    s += c * ((k_max - ks) / ks).ln();
    p.m_a + 2.0 * s
}
