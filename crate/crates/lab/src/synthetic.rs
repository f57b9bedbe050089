//! Synthetic calibration measurements generated from the analytic model,
//! with seeded i.i.d. Gaussian noise of configurable relative amplitude.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sideband_core::calibration::thermometry::HBAR;
use sideband_core::calibration::{bose_occupation, output_floor_model, s21_shunt, ShuntModel};
use sideband_core::model::linspace;
use sideband_core::multitone::{full_rwa_spectrum, multitone_rates};
use sideband_core::scattering::{single_tone_spectrum, EvalOptions};
use sideband_core::{
    BathSpec, Result, Sideband, Spectrum, SpectrumKind, SystemParams, ToneConfig, ToneRole,
    ToneSpec, TWO_PI,
};

use crate::calibrate::{
    pump_channels, twin_sideband_powers, CalibrationData, CalibrationSettings, ThermometryRow,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSettings {
    /// Relative standard deviation added to every generated value.
    pub noise: f64,
    pub seed: u64,
    pub temperatures_k: Vec<f64>,
    /// Photon number of each balanced thermometry probe.
    pub thermometry_n_p: f64,
    /// Probe offset δ for the thermometry and linewidth sweeps, Hz.
    pub probe_delta_hz: f64,
    pub linewidth_n_p: Vec<f64>,
    /// Output-line occupation put into the floor spectrum.
    pub floor_n_r: f64,
    pub floor_points: usize,
    pub spectrum_points: usize,
    pub s21_points: usize,
    pub c_out_f: f64,
}

impl Default for SyntheticSettings {
    fn default() -> Self {
        Self {
            noise: 0.01,
            seed: 0,
            temperatures_k: vec![0.02, 0.05, 0.08, 0.11, 0.14, 0.17, 0.2],
            thermometry_n_p: 1e4,
            probe_delta_hz: 500.0,
            linewidth_n_p: vec![1e3, 1e4, 1e5, 1e6, 1e7],
            floor_n_r: 0.34,
            floor_points: 4001,
            spectrum_points: 8001,
            s21_points: 801,
            c_out_f: 2.7e-15,
        }
    }
}

struct Noise {
    rng: ChaCha8Rng,
    normal: Normal<f64>,
}

impl Noise {
    fn new(seed: u64, rel: f64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            normal: Normal::new(0.0, rel.max(0.0)).expect("finite sigma"),
        }
    }

    /// v·(1 + ε), ε ~ N(0, rel²).
    fn apply(&mut self, v: f64) -> f64 {
        v * (1.0 + self.normal.sample(&mut self.rng))
    }
}

/// Generates every file of a calibration data set. `baths` supplies the
/// cavity-side occupations; the mechanical bath follows each temperature.
pub fn generate(
    p: &SystemParams,
    baths: &BathSpec,
    cal: &CalibrationSettings,
    s: &SyntheticSettings,
) -> Result<CalibrationData> {
    let mut noise = Noise::new(s.seed, s.noise);
    let delta = TWO_PI * s.probe_delta_hz;
    let (plus, minus) = pump_channels(p, delta, cal, s.c_out_f)?;
    let mut data = CalibrationData::default();

    // S21 over ±8 ω_m around the cavity
    let shunt = ShuntModel::new(s.c_out_f, cal.r_l_ohm)?;
    let w = linspace(
        p.omega_c() - 8.0 * p.omega_m(),
        p.omega_c() + 8.0 * p.omega_m(),
        s.s21_points,
    );
    let db = w
        .iter()
        .map(|&x| 20.0 * noise.apply(s21_shunt(p, &shunt, x).norm()).log10())
        .collect();
    data.s21 = Some((w, db));

    // temperature sweep with balanced probes
    let probes = ToneConfig::new(
        p,
        vec![
            ToneSpec::from_photons(
                p,
                -(p.omega_m() + delta),
                s.thermometry_n_p,
                ToneRole::RedProbe,
            )?,
            ToneSpec::from_photons(
                p,
                p.omega_m() + delta,
                s.thermometry_n_p,
                ToneRole::BlueProbe,
            )?,
        ],
        delta,
        0.0,
        false,
    )?;
    // two windows of ±50 γ_M around the sidebands when they are far apart
    let gm = multitone_rates(p, baths, &probes)?.gamma_m_eff;
    let grid = if delta > 60.0 * gm {
        let half = s.spectrum_points / 2;
        let mut g = linspace(-delta - 50.0 * gm, -delta + 50.0 * gm, half);
        g.extend(linspace(delta - 50.0 * gm, delta + 50.0 * gm, half));
        g
    } else {
        linspace(-2.0 * delta, 2.0 * delta, s.spectrum_points)
    };
    let to_watts = cal.gain_cavity * HBAR * p.omega_c() / TWO_PI;
    for &t in &s.temperatures_k {
        let b = BathSpec {
            n_m: bose_occupation(p.omega_m(), t)?,
            ..*baths
        };
        let spec = full_rwa_spectrum(p, &b, &probes, &grid)?.total();
        // W/Hz: quanta per unit angular bandwidth times ħω_c, per Hz
        let values = spec
            .values()
            .iter()
            .map(|v| noise.apply(v * to_watts * TWO_PI))
            .collect();
        let watts = Spectrum::new(grid.clone(), values)?;
        let (anti_stokes, stokes) = twin_sideband_powers(&watts)?;
        data.thermometry.push(ThermometryRow {
            temperature_k: t,
            p_m_plus_w: anti_stokes,
            p_m_minus_w: stokes,
            p_thru_plus_w: noise.apply(plus.through_power(p, s.thermometry_n_p)),
            p_thru_minus_w: noise.apply(minus.through_power(p, s.thermometry_n_p)),
        });
    }

    // red-probe linewidth sweep
    let opts = EvalOptions::default();
    for &n_p in &s.linewidth_n_p {
        // the single-tone model puts the drive on the sideband: the peak sits at ν = 0
        let tone = ToneSpec::from_photons(p, -(p.omega_m() + delta), n_p, ToneRole::RedProbe)?;
        let gamma_tot = p.gamma_m() + tone.gamma_opt(p);
        let grid = linspace(-10.0 * gamma_tot, 10.0 * gamma_tot, s.spectrum_points);
        let spec = single_tone_spectrum(
            p,
            baths,
            &tone,
            Sideband::Red,
            SpectrumKind::Symmetrized,
            &grid,
            &opts,
        )?;
        let noisy = Spectrum::new(
            grid,
            spec.values().iter().map(|v| noise.apply(*v)).collect(),
        )?;
        let fit = sideband_core::calibration::fit_lorentzian(&noisy, None)?;
        data.linewidth
            .push((noise.apply(plus.through_power(p, n_p)), fit.width));
    }

    // broadband floor from the output line alone, over ±2κ
    let s_hemt = 1.0 / cal.lambda_per_w_hz;
    let nu = linspace(-2.0 * p.kappa(), 2.0 * p.kappa(), s.floor_points);
    let floor = nu
        .iter()
        .map(|&x| {
            noise.apply(output_floor_model(
                p,
                s.floor_n_r,
                cal.alpha_r,
                cal.lambda_per_w_hz,
                s_hemt,
                x,
            ))
        })
        .collect();
    data.floor = Some(Spectrum::new(nu, floor)?);
    Ok(data)
}
