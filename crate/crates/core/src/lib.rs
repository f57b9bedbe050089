//! Analytic output-noise spectra of a driven cavity opto/electro-mechanical system.
//!
//! Conventions used everywhere in this crate:
//!
//! * ħ = 1. Spectral densities are in quanta (photons per second per unit
//!   bandwidth), the cross-correlator `S_zF` in units of ħ.
//! * All rates and frequencies are angular (rad/s). Conversion from Hz happens
//!   at the IO boundary, never in here.
//! * A tone's `detuning` is `ω_p − ω_c`. The sideband label follows the
//!   scattering literature: a red-sideband drive (`ω_p ≈ ω_c − ω_m`) has
//!   `Δ = ω_c − ω_p = +ω_m`.
//! * Single-tone spectra are reported on a grid of offsets `ν = ω − ω_c` from
//!   the cavity resonance; internally the drive-frame frequency is
//!   `ν ± ω_m`.
#![no_std]
// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod calibration;
pub mod error;
pub mod linear_response;
pub mod model;
pub mod multitone;
pub mod scattering;

pub use error::{Error, Result};
pub use model::{
    derive_effective_mechanics, validate_stability, BathSpec, EffectiveMechanics, Sideband,
    Spectrum, SpectrumKind, SystemParams, ToneConfig, ToneRole, ToneSpec,
};

/// Two pi, spelled out because it shows up at every unit boundary.
pub const TWO_PI: f64 = core::f64::consts::TAU;
