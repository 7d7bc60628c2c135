//! States, amplitudes, decay fits and the boost experiments.

mod amplitude;
mod experiments;
mod fit;
mod model;
mod states;

pub use amplitude::{
    amplitude_label, amplitude_v, boost_state, rescaled_closed_form, survival_a, survival_label, survival_of,
    uniform_grid, AmplitudeSeries, Route, CAUCHY_SCHWARZ_SLACK,
};
pub use experiments::{
    boosted_moments, check_dilation, default_t_grid, mixture_experiment, speedup_experiment, DilationEntry,
    DilationReport, MixtureReport, Moments, SpeedupEntry, SpeedupRun, DEFAULT_SAMPLES,
};
pub use fit::{fit_decay, DecayFit, FitOptions, MIN_SERIES_SAMPLES};
pub use model::{golden_rule_width, GoldenRule, LeeModel};
pub use states::{make_packet_phi0, make_phi0, make_psi_p};
