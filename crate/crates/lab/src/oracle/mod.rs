//! Monte-Carlo oracle: integrate the classical Langevin equations with
//! symmetrized input noise, estimate the output PSD, compare with the
//! analytic spectra.

pub mod compare;
pub mod integrate;
pub mod noise;
pub mod psd;

pub use compare::{
    canonical_configs, compare, expected_spectrum, CanonicalConfig, Comparison, ExpectedPeak,
    PeakComparison, CENTER_TOL, FLOOR_TOL, WEIGHT_TOL,
};
pub use integrate::{
    integrate_langevin, integrate_with_unit_noise, mechanical_occupation, simulate_psd,
    thread_count, OraclePsd, SimConfig, TrajectoryOutput, RNG_ALGORITHM,
};
pub use noise::{channel_variance, synthesize_input_noise, Channel};
pub use psd::{estimate_psd, estimate_psd_ensemble, Welch};
