use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::evolution::{FitOptions, DEFAULT_SAMPLES};
use crate::forge::C64;
use crate::kinematics::{check_velocity, MomentumGrid, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_modes: usize,
    pub dk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeGridConfig {
    /// `None` picks `min(20 / Gamma_GR, recurrence guard)`.
    pub t_max: Option<f64>,
    pub samples: usize,
}

impl Default for TimeGridConfig {
    fn default() -> Self {
        Self { t_max: None, samples: DEFAULT_SAMPLES }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoostConfig {
    pub use_refined: bool,
    pub beta_sweep: Vec<f64>,
    /// `None` means ten times the real unknown count.
    pub lsq_max_iterations: Option<usize>,
    pub lsq_tolerance: f64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self {
            use_refined: false,
            beta_sweep: (1..=10).map(|i| i as f64 / 10.0).collect(),
            lsq_max_iterations: None,
            lsq_tolerance: 1e-10,
        }
    }
}

fn default_velocities() -> Vec<f64> {
    vec![0.2, 0.5, 0.8]
}

fn default_momenta() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}

fn default_mixture_weights() -> [[f64; 2]; 2] {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    [[a, 0.0], [a, 0.0]]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Run configuration; absent optional keys take defaults, unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub grid: GridConfig,
    /// Defaults to `4 dk`.
    #[serde(default)]
    pub packet_width: Option<f64>,
    #[serde(default = "default_velocities")]
    pub velocities: Vec<f64>,
    #[serde(default = "default_momenta")]
    pub momenta: Vec<f64>,
    #[serde(default)]
    pub t_grid: TimeGridConfig,
    #[serde(default)]
    pub boost: BoostConfig,
    #[serde(default)]
    pub fit: FitOptions,
    /// `[re, im]` amplitudes of `Phi_v` and `psi_p` in the mixture.
    #[serde(default = "default_mixture_weights")]
    pub mixture_weights: [[f64; 2]; 2],
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn config_error(e: LabError) -> LabError {
    match e {
        LabError::Config(_) => e,
        other => LabError::Config(other.to_string().trim_start_matches("domain error: ").to_string()),
    }
}

impl RunConfig {
    /// Parses JSON text, fills defaults and validates.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| LabError::Config(format!("invalid config: {e}")))?;
        cfg.resolve()?;
        Ok(cfg)
    }

    /// The reference model: 41 modes at `dk = 0.25`, `m = (1, 0.4, 0.3)`, `g = 0.05`, `Lambda = 2`.
    pub fn reference() -> Self {
        let text = r#"{
            "model": {"m_a": 1.0, "m_b": 0.4, "m_c": 0.3, "g": 0.05, "lambda_ff": 2.0},
            "grid": {"n_modes": 41, "dk": 0.25}
        }"#;
        Self::from_json(text).expect("reference config is valid")
    }

    fn resolve(&mut self) -> Result<()> {
        let grid = self.momentum_grid()?;
        self.model.validate()?;
        let width = *self.packet_width.get_or_insert(4.0 * self.grid.dk);
        if !(width > 0.0) || !width.is_finite() {
            return Err(LabError::Config(format!("packet_width must be positive, got {width}")));
        }
        for &v in &self.velocities {
            check_velocity(v).map_err(config_error)?;
        }
        for &p in &self.momenta {
            grid.tick_of(p).map_err(config_error)?;
        }
        if let Some(t) = self.t_grid.t_max {
            if !(t > 0.0) || !t.is_finite() {
                return Err(LabError::Config(format!("t_grid.t_max must be positive, got {t}")));
            }
        }
        if self.t_grid.samples < 2 {
            return Err(LabError::Config(format!("t_grid.samples must be at least 2, got {}", self.t_grid.samples)));
        }
        if self.boost.beta_sweep.iter().any(|b| !b.is_finite()) {
            return Err(LabError::Config("boost.beta_sweep must hold finite rapidities".into()));
        }
        if !(self.boost.lsq_tolerance > 0.0) {
            return Err(LabError::Config(format!("boost.lsq_tolerance must be positive, got {}", self.boost.lsq_tolerance)));
        }
        self.fit.validate()?;
        let w = self.mixture_weights;
        let n = w[0][0].powi(2) + w[0][1].powi(2) + w[1][0].powi(2) + w[1][1].powi(2);
        if (n - 1.0).abs() > 1e-12 {
            return Err(LabError::Config(format!("mixture_weights must be normalized, got squared norm {n}")));
        }
        Ok(())
    }

    pub fn momentum_grid(&self) -> Result<MomentumGrid> {
        MomentumGrid::new(self.grid.n_modes, self.grid.dk)
    }

    pub fn packet_width(&self) -> f64 {
        self.packet_width.unwrap_or(4.0 * self.grid.dk)
    }

    pub fn weights(&self) -> [C64; 2] {
        let w = self.mixture_weights;
        [C64::new(w[0][0], w[0][1]), C64::new(w[1][0], w[1][1])]
    }
}

/// Reads and validates a JSON config file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Config(format!("cannot read config {}: {e}", path.display())))?;
    RunConfig::from_json(&text)
}
