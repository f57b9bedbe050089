//! Monte-Carlo spectra against the analytic symmetrized spectra.
//!
//! Peaks are extracted by fitting the floor and every expected Lorentzian
//! jointly (weighted by the model itself, as periodogram noise is
//! proportional to the spectrum) over the window that spans all of them (±10 widths beyond the
//! outermost centers). A peak's weight is then the direct integral of the
//! measured spectrum, minus the fitted floor and the other fitted peaks,
//! over ±5 fitted widths of its center, rescaled by the Lorentzian fraction
//! (2/π)·atan(10) that window holds.

use serde::Serialize;
use sideband_core::calibration::{fit_lorentzians, fit_lorentzians_weighted, Peak};
use sideband_core::multitone::{multitone_rates, multitone_spectra};
use sideband_core::scattering::{lorentzian_weight, noise_floor};
use sideband_core::{
    BathSpec, Result, Sideband, Spectrum, SpectrumKind, SystemParams, ToneConfig, ToneRole,
    ToneSpec,
};
use std::f64::consts::PI;

use super::integrate::{simulate_psd, SimConfig, RNG_ALGORITHM};

pub const FLOOR_TOL: f64 = 0.02;
pub const WEIGHT_TOL: f64 = 0.05;
/// Center tolerance in units of γ_tot.
pub const CENTER_TOL: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectedPeak {
    pub label: String,
    /// Offset from the cavity, rad/s.
    pub center: f64,
    /// FWHM, rad/s.
    pub width: f64,
    /// ∫dω/2π, quanta.
    pub weight: f64,
    /// False for peaks that are fitted but not judged (the cooling sideband).
    pub compared: bool,
}

impl ExpectedPeak {
    fn lorentzian(&self) -> Peak {
        Peak {
            center: self.center,
            width: self.width,
            amplitude: 4.0 * self.weight / self.width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expected {
    pub floor: f64,
    pub gamma_tot: f64,
    pub peaks: Vec<ExpectedPeak>,
}

impl Expected {
    pub fn value(&self, nu: f64) -> f64 {
        self.floor
            + self
                .peaks
                .iter()
                .map(|p| p.lorentzian().value(nu))
                .sum::<f64>()
    }
}

fn center_of(p: &SystemParams, t: &ToneSpec) -> f64 {
    // the tone scatters the mechanics to ω_p ± ω_m
    t.detuning() + t.sideband().sign() * p.omega_m()
}

/// Analytic floor and sideband peaks of a configuration. A lone probe uses
/// the single-tone closed form; probe pairs and cooled setups use the
/// multitone reduction, and the cooling tone's own sideband is listed as an
/// uncompared nuisance peak.
pub fn expected_spectrum(p: &SystemParams, baths: &BathSpec, cfg: &ToneConfig) -> Result<Expected> {
    let floor = noise_floor(p, baths);
    let x = p.kappa_r() / p.kappa();
    let lone = cfg.tones().len() == 1 && cfg.cooling().is_none();
    if lone {
        let t = &cfg.tones()[0];
        let sb = t.sideband();
        let gamma_tot = p.gamma_m() + sb.sign() * t.gamma_opt(p);
        let weight = lorentzian_weight(p, baths, t, sb, SpectrumKind::Symmetrized)?;
        let label = match sb {
            Sideband::Red => "anti_stokes",
            Sideband::Blue => "stokes",
        };
        return Ok(Expected {
            floor,
            gamma_tot,
            peaks: vec![ExpectedPeak {
                label: label.into(),
                center: center_of(p, t),
                width: gamma_tot,
                weight,
                compared: true,
            }],
        });
    }
    let ms = multitone_spectra(p, baths, cfg, SpectrumKind::Symmetrized, &[0.0])?;
    let r = multitone_rates(p, baths, cfg)?;
    let mut peaks = Vec::new();
    if let Some(t) = cfg.red_probe() {
        peaks.push(ExpectedPeak {
            label: "anti_stokes".into(),
            center: center_of(p, t),
            width: r.gamma_tot,
            weight: ms.anti_stokes_weight,
            compared: true,
        });
    }
    if let Some(t) = cfg.blue_probe() {
        peaks.push(ExpectedPeak {
            label: "stokes".into(),
            center: center_of(p, t),
            width: r.gamma_tot,
            weight: ms.stokes_weight,
            compared: true,
        });
    }
    if let Some(t) = cfg.cooling() {
        peaks.push(ExpectedPeak {
            label: "cooling".into(),
            center: center_of(p, t),
            width: r.gamma_tot,
            weight: x * r.gamma_cool * (r.n_bar_m - r.n_eff),
            compared: false,
        });
    }
    Ok(Expected {
        floor,
        gamma_tot: r.gamma_tot,
        peaks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakComparison {
    pub label: String,
    pub compared: bool,
    pub center_analytic: f64,
    pub center_mc: f64,
    pub center_tol: f64,
    pub width_mc: f64,
    pub analytic_weight: f64,
    pub mc_weight: f64,
    /// A·w/4 of the fitted Lorentzian, for reference.
    pub fit_weight: f64,
    pub rel_err: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub floor_analytic: f64,
    pub floor_mc: f64,
    pub floor_rel_err: f64,
    pub floor_pass: bool,
    pub peaks: Vec<PeakComparison>,
    pub n_segments: usize,
    pub segment_len: usize,
    pub dt: f64,
    pub seed: u64,
    pub rng: String,
    #[serde(skip)]
    pub mc_spectrum: Spectrum,
    #[serde(skip)]
    pub expected: Expected,
}

impl Comparison {
    pub fn pass(&self) -> bool {
        self.floor_pass && self.peaks.iter().all(|p| p.pass)
    }

    /// Analytic spectrum on the Monte-Carlo grid.
    pub fn analytic_spectrum(&self) -> Spectrum {
        let x = self.mc_spectrum.freq_offsets();
        Spectrum::new(
            x.to_vec(),
            x.iter().map(|&nu| self.expected.value(nu)).collect(),
        )
        .expect("finite")
    }
}

/// Fits and integrates the peaks of a measured spectrum against expectations.
pub fn extract(spec: &Spectrum, expected: &Expected) -> Result<(f64, Vec<(Peak, f64)>)> {
    let wmax = expected.peaks.iter().fold(0.0f64, |m, p| m.max(p.width));
    let lo = expected
        .peaks
        .iter()
        .fold(f64::INFINITY, |m, p| m.min(p.center))
        - 10.0 * wmax;
    let hi = expected
        .peaks
        .iter()
        .fold(f64::NEG_INFINITY, |m, p| m.max(p.center))
        + 10.0 * wmax;
    let (x, y): (Vec<f64>, Vec<f64>) = spec
        .freq_offsets()
        .iter()
        .zip(spec.values())
        .filter(|(nu, _)| **nu >= lo && **nu <= hi)
        .map(|(a, b)| (*a, *b))
        .unzip();
    let init: Vec<Peak> = expected.peaks.iter().map(|p| p.lorentzian()).collect();
    // first pass unweighted, second with σ_k ∝ the first-pass model
    let rough = fit_lorentzians(&x, &y, expected.floor, &init)?;
    let sigma: Vec<f64> = x
        .iter()
        .map(|&nu| rough.value(nu).abs().max(1e-3 * rough.floor.abs()))
        .collect();
    let fit = fit_lorentzians_weighted(&x, &y, Some(&sigma), rough.floor, &rough.peaks)?;
    let df = if x.len() > 1 { x[1] - x[0] } else { 0.0 };
    let fraction = 2.0 / PI * 10f64.atan();
    let out = fit
        .peaks
        .iter()
        .enumerate()
        .map(|(k, pk)| {
            let half = 5.0 * pk.width;
            let sum: f64 = x
                .iter()
                .zip(&y)
                .filter(|(nu, _)| (**nu - pk.center).abs() <= half)
                .map(|(&nu, &v)| {
                    let others: f64 = fit
                        .peaks
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != k)
                        .map(|(_, q)| q.value(nu))
                        .sum();
                    v - fit.floor - others
                })
                .sum();
            (*pk, sum * df / (2.0 * PI) / fraction)
        })
        .collect();
    Ok((fit.floor, out))
}

/// Runs the oracle for one configuration and compares it with the analytic spectra.
pub fn compare(
    p: &SystemParams,
    baths: &BathSpec,
    cfg: &ToneConfig,
    sim: &SimConfig,
) -> Result<Comparison> {
    let expected = expected_spectrum(p, baths, cfg)?;
    let psd = simulate_psd(p, baths, cfg, sim)?;
    let (floor_mc, peaks) = extract(&psd.spectrum, &expected)?;
    let floor_rel_err = floor_mc / expected.floor - 1.0;
    let center_tol = CENTER_TOL * expected.gamma_tot;
    let peaks = expected
        .peaks
        .iter()
        .zip(peaks)
        .map(|(e, (fit, mc_weight))| {
            let rel_err = mc_weight / e.weight - 1.0;
            let ok = rel_err.abs() <= WEIGHT_TOL && (fit.center - e.center).abs() <= center_tol;
            PeakComparison {
                label: e.label.clone(),
                compared: e.compared,
                center_analytic: e.center,
                center_mc: fit.center,
                center_tol,
                width_mc: fit.width,
                analytic_weight: e.weight,
                mc_weight,
                fit_weight: fit.weight(),
                rel_err,
                pass: ok || !e.compared,
            }
        })
        .collect();
    Ok(Comparison {
        floor_analytic: expected.floor,
        floor_mc,
        floor_rel_err,
        floor_pass: floor_rel_err.abs() <= FLOOR_TOL,
        peaks,
        n_segments: psd.segments,
        segment_len: psd.segment_len,
        dt: sim.dt,
        seed: sim.seed,
        rng: RNG_ALGORITHM.into(),
        mc_spectrum: psd.spectrum,
        expected,
    })
}

/// One of the reference setups, in scaled units (κ = 1 rad/s, ω_m = 10 rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalConfig {
    pub name: &'static str,
    pub params: SystemParams,
    pub baths: BathSpec,
    pub tones: ToneConfig,
    pub sim: SimConfig,
}

pub const SCALED_DT: f64 = 0.045;
const OMEGA_M: f64 = 10.0;
const DELTA: f64 = 0.04;

fn scaled(kr: f64, kl: f64, ki: f64, gamma_m: f64) -> SystemParams {
    SystemParams::new(1e3, OMEGA_M, 1e-3, kl, kr, ki, gamma_m).expect("valid scaled system")
}

/// G for a cooperativity C = 4G²/(κγ_m).
fn coupling(p: &SystemParams, c: f64) -> f64 {
    (c * p.kappa() * p.gamma_m() / 4.0).sqrt()
}

fn tone(p: &SystemParams, role: ToneRole, delta: f64, g: f64) -> ToneSpec {
    let det = match role {
        ToneRole::BlueProbe => p.omega_m() + delta,
        _ => -(p.omega_m() + delta),
    };
    ToneSpec::from_coupling(det, g, role).expect("valid tone")
}

fn sim_for(
    gamma_tot: f64,
    segment_len: usize,
    segments: usize,
    trajectories: usize,
    seed: u64,
) -> SimConfig {
    let burn_in = (20.0 / gamma_tot / SCALED_DT).ceil() as usize;
    let per = segments.div_ceil(trajectories);
    SimConfig::from_segments(SCALED_DT, segment_len, per, trajectories, burn_in, seed)
}

/// The five reference setups: red probe, blue probe, balanced pair, balanced
/// pair with cooling, and thermal-cavity squashing (a negative anti-Stokes
/// weight). `scale` multiplies the number of Welch segments; at 1 every
/// weight carries a statistical error of about 1%.
pub fn canonical_configs(seed: u64, scale: f64) -> Vec<CanonicalConfig> {
    let n = |k: usize| ((k as f64 * scale).round() as usize).max(4);
    let mut out = Vec::new();

    let p = scaled(0.6, 0.4, 0.0, 0.01);
    let g = coupling(&p, 0.1);
    let baths = BathSpec::thermal(0.0, 0.0, 0.0, 100.0);
    let tones = ToneConfig::new(
        &p,
        vec![tone(&p, ToneRole::RedProbe, DELTA, g)],
        DELTA,
        0.0,
        false,
    )
    .expect("red");
    out.push(CanonicalConfig {
        name: "red_probe",
        params: p,
        baths,
        tones,
        sim: sim_for(0.011, 1 << 16, n(2000), 4, seed),
    });

    let tones = ToneConfig::new(
        &p,
        vec![tone(&p, ToneRole::BlueProbe, DELTA, g)],
        DELTA,
        0.0,
        false,
    )
    .expect("blue");
    out.push(CanonicalConfig {
        name: "blue_probe",
        params: p,
        baths,
        tones,
        sim: sim_for(0.009, 1 << 16, n(2000), 4, seed),
    });

    let p = scaled(0.6, 0.4, 0.0, 0.003);
    let g = coupling(&p, 1.0);
    let baths = BathSpec::thermal(0.0, 0.0, 0.0, 5.0);
    let tones = ToneConfig::new(
        &p,
        vec![
            tone(&p, ToneRole::RedProbe, DELTA, g),
            tone(&p, ToneRole::BlueProbe, DELTA, g),
        ],
        DELTA,
        0.0,
        false,
    )
    .expect("pair");
    out.push(CanonicalConfig {
        name: "balanced_pair",
        params: p,
        baths,
        tones,
        sim: sim_for(0.003, 1 << 17, n(2000), 4, seed),
    });

    let p = scaled(0.6, 0.4, 0.0, 0.0005);
    let g = (0.002 * p.kappa() / 4.0).sqrt();
    let gc = (0.0025 * p.kappa() / 4.0).sqrt();
    let baths = BathSpec::thermal(0.0, 0.0, 0.0, 100.0);
    let tones = ToneConfig::new(
        &p,
        vec![
            tone(&p, ToneRole::RedProbe, DELTA, g),
            tone(&p, ToneRole::BlueProbe, DELTA, g),
            tone(&p, ToneRole::Cooling, 2.0 * DELTA, gc),
        ],
        DELTA,
        2.0 * DELTA,
        false,
    )
    .expect("cooled pair");
    out.push(CanonicalConfig {
        name: "balanced_pair_cooling",
        params: p,
        baths,
        tones,
        sim: sim_for(0.003, 1 << 17, n(2000), 4, seed),
    });

    let p = scaled(0.9, 0.05, 0.05, 0.01);
    let g = coupling(&p, 1.0);
    let baths = BathSpec::thermal(2.0, 2.0, 2.0, 0.0);
    // on the sideband: the dip is narrow enough without a probe offset
    let tones = ToneConfig::new(
        &p,
        vec![tone(&p, ToneRole::RedProbe, 0.0, g)],
        0.0,
        0.0,
        false,
    )
    .expect("squash");
    out.push(CanonicalConfig {
        name: "thermal_squashing",
        params: p,
        baths,
        tones,
        sim: sim_for(0.02, 1 << 15, n(12800), 4, seed),
    });
    out
}
