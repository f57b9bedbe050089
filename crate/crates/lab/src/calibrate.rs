//! The calibration chain on measured (or synthetic) data: output shunt from
//! the S21 trace, g0 from the temperature sweep and from the linewidth
//! sweep, n_eff from the sideband difference, n_R from the broadband floor.
//!
//! Data directory layout (all files optional, `#` lines are comments):
//!
//! * `thermometry.csv`: temperature_k, p_m_plus_w, p_m_minus_w, p_thru_plus_w, p_thru_minus_w
//! * `linewidth.csv`: p_thru_w, gamma_hz (red-probe sweep, FWHM)
//! * `floor.csv`: freq_hz (offset from ω_c), S in W/Hz
//! * `s21.csv`: freq_hz (absolute), |S21| in dB

use serde::{Deserialize, Serialize};
use sideband_core::calibration::lorentzian::initial_guess;
use sideband_core::calibration::{
    bose_occupation, fit_linewidth_vs_power, fit_lorentzians, fit_output_occupation,
    fit_shunt_capacitance, fit_thermometry, g0_from_linewidth_slope, shunt_delta,
    transmission_ratio_db, PumpChannel, ShuntModel,
};
use sideband_core::{Error, Result, Spectrum, SystemParams, TWO_PI};
use std::path::Path;

use crate::io::{file_sha256, read_columns, read_spectrum, write_columns, write_spectrum, IoError};

fn default_lambda() -> f64 {
    0.27e18
}
fn default_r_l() -> f64 {
    50.0
}
fn unit() -> f64 {
    1.0
}

/// Constants the chain takes as given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSettings {
    /// Quanta per W/Hz of detected spectral density.
    #[serde(default = "default_lambda")]
    pub lambda_per_w_hz: f64,
    #[serde(default = "default_r_l")]
    pub r_l_ohm: f64,
    #[serde(default = "unit")]
    pub gain_cavity: f64,
    #[serde(default = "unit")]
    pub gain_plus: f64,
    #[serde(default = "unit")]
    pub gain_minus: f64,
    /// Used for Δ(ω_±) when no S21 trace is supplied.
    #[serde(default)]
    pub c_out_f: f64,
    #[serde(default = "unit")]
    pub alpha_r: f64,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            lambda_per_w_hz: default_lambda(),
            r_l_ohm: default_r_l(),
            gain_cavity: 1.0,
            gain_plus: 1.0,
            gain_minus: 1.0,
            c_out_f: 0.0,
            alpha_r: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermometryRow {
    pub temperature_k: f64,
    pub p_m_plus_w: f64,
    pub p_m_minus_w: f64,
    pub p_thru_plus_w: f64,
    pub p_thru_minus_w: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CalibrationData {
    pub thermometry: Vec<ThermometryRow>,
    /// (P_thru in W, γ_tot in rad/s).
    pub linewidth: Vec<(f64, f64)>,
    /// Offsets in rad/s, values in W/Hz.
    pub floor: Option<Spectrum>,
    /// Absolute ω in rad/s, |S21| in dB.
    pub s21: Option<(Vec<f64>, Vec<f64>)>,
    /// (file name, sha256) of every ingested file.
    pub inputs: Vec<(String, String)>,
}

fn read_rows(path: &Path, width: usize) -> std::result::Result<Vec<Vec<f64>>, IoError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| IoError::Csv {
            path: path.display().to_string(),
            source,
        })?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|source| IoError::Csv {
            path: path.display().to_string(),
            source,
        })?;
        let row: Option<Vec<f64>> = rec.iter().map(|s| s.parse().ok()).collect();
        match row {
            Some(v) if v.len() == width => rows.push(v),
            _ => {
                return Err(IoError::Format {
                    path: path.display().to_string(),
                    reason: format!("expected {width} numeric columns"),
                })
            }
        }
    }
    Ok(rows)
}

pub fn load_data_dir(dir: &Path) -> std::result::Result<CalibrationData, IoError> {
    let mut data = CalibrationData::default();
    let note = |name: &str, data: &mut CalibrationData| -> std::result::Result<(), IoError> {
        data.inputs
            .push((name.to_string(), file_sha256(&dir.join(name))?));
        Ok(())
    };
    let p = dir.join("thermometry.csv");
    if p.exists() {
        data.thermometry = read_rows(&p, 5)?
            .into_iter()
            .map(|v| ThermometryRow {
                temperature_k: v[0],
                p_m_plus_w: v[1],
                p_m_minus_w: v[2],
                p_thru_plus_w: v[3],
                p_thru_minus_w: v[4],
            })
            .collect();
        note("thermometry.csv", &mut data)?;
    }
    let p = dir.join("linewidth.csv");
    if p.exists() {
        data.linewidth = read_rows(&p, 2)?
            .into_iter()
            .map(|v| (v[0], TWO_PI * v[1]))
            .collect();
        note("linewidth.csv", &mut data)?;
    }
    let p = dir.join("floor.csv");
    if p.exists() {
        data.floor = Some(read_spectrum(&p)?);
        note("floor.csv", &mut data)?;
    }
    let p = dir.join("s21.csv");
    if p.exists() {
        let (f, db) = read_columns(&p)?;
        data.s21 = Some((f.iter().map(|v| TWO_PI * v).collect(), db));
        note("s21.csv", &mut data)?;
    }
    Ok(data)
}

/// Writes the files [`load_data_dir`] reads; returns their names.
pub fn write_data_dir(
    dir: &Path,
    data: &CalibrationData,
) -> std::result::Result<Vec<String>, IoError> {
    let mut names = Vec::new();
    if !data.thermometry.is_empty() {
        let col =
            |f: fn(&ThermometryRow) -> f64| data.thermometry.iter().map(f).collect::<Vec<_>>();
        let cols = [
            col(|r| r.temperature_k),
            col(|r| r.p_m_plus_w),
            col(|r| r.p_m_minus_w),
            col(|r| r.p_thru_plus_w),
            col(|r| r.p_thru_minus_w),
        ];
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        write_columns(
            &dir.join("thermometry.csv"),
            &[
                "temperature_k",
                "p_m_plus_w",
                "p_m_minus_w",
                "p_thru_plus_w",
                "p_thru_minus_w",
            ],
            &refs,
        )?;
        names.push("thermometry.csv".to_string());
    }
    if !data.linewidth.is_empty() {
        let pw: Vec<f64> = data.linewidth.iter().map(|v| v.0).collect();
        let hz: Vec<f64> = data.linewidth.iter().map(|v| v.1 / TWO_PI).collect();
        write_columns(
            &dir.join("linewidth.csv"),
            &["p_thru_w", "gamma_hz"],
            &[&pw, &hz],
        )?;
        names.push("linewidth.csv".to_string());
    }
    if let Some(floor) = &data.floor {
        write_spectrum(&dir.join("floor.csv"), floor)?;
        names.push("floor.csv".to_string());
    }
    if let Some((w, db)) = &data.s21 {
        let hz: Vec<f64> = w.iter().map(|v| v / TWO_PI).collect();
        write_columns(&dir.join("s21.csv"), &["freq_hz", "s21_db"], &[&hz, db])?;
        names.push("s21.csv".to_string());
    }
    Ok(names)
}

/// Integrated power of the two sidebands of a twin-peak spectrum
/// (anti-Stokes below the cavity, Stokes above), by a floor + two-Lorentzian
/// fit. With the spectrum in W/Hz the weights come out in W.
pub fn twin_sideband_powers(spec: &Spectrum) -> Result<(f64, f64)> {
    let (x, y) = (spec.freq_offsets(), spec.values());
    let split = x.partition_point(|&v| v < 0.0);
    if split < 10 || x.len() - split < 10 {
        return Err(Error::DegenerateData(
            "each sideband needs at least 10 points".into(),
        ));
    }
    let (f_lo, p_lo) = initial_guess(&x[..split], &y[..split])?;
    let (f_hi, p_hi) = initial_guess(&x[split..], &y[split..])?;
    let fit = fit_lorentzians(x, y, 0.5 * (f_lo + f_hi), &[p_lo, p_hi])?;
    Ok((fit.peaks[0].weight(), fit.peaks[1].weight()))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub c_out_f: Option<f64>,
    pub c_out_sigma_f: Option<f64>,
    /// |S21|² at the blue-pump detuning over the red one, dB.
    pub pump_ratio_db: Option<f64>,
    pub delta_plus: Option<f64>,
    pub delta_minus: Option<f64>,
    pub g0_thermometry_hz: Option<f64>,
    pub g0_thermometry_sigma_hz: Option<f64>,
    pub g0_plus_hz: Option<f64>,
    pub g0_minus_hz: Option<f64>,
    /// n_m± = c±·P_m±/P_thru±.
    pub conversion_plus: Option<f64>,
    pub conversion_minus: Option<f64>,
    pub n_eff: Option<f64>,
    pub gamma_m_hz: Option<f64>,
    pub g0_linewidth_hz: Option<f64>,
    pub n_r: Option<f64>,
    pub n_r_sigma: Option<f64>,
    pub s_hemt_w_per_hz: Option<f64>,
    pub inputs: Vec<(String, String)>,
}

/// Pump channels for the red (+) and blue (−) probes at ω_c ∓ (ω_m + δ).
pub fn pump_channels(
    p: &SystemParams,
    delta: f64,
    s: &CalibrationSettings,
    c_out: f64,
) -> Result<(PumpChannel, PumpChannel)> {
    let shunt = ShuntModel::new(c_out, s.r_l_ohm)?;
    let w_plus = p.omega_c() - p.omega_m() - delta;
    let w_minus = p.omega_c() + p.omega_m() + delta;
    let plus = PumpChannel {
        omega_pump: w_plus,
        gain_cavity: s.gain_cavity,
        gain_pump: s.gain_plus,
        delta_corr: shunt_delta(p, &shunt, w_plus),
    };
    let minus = PumpChannel {
        omega_pump: w_minus,
        gain_cavity: s.gain_cavity,
        gain_pump: s.gain_minus,
        delta_corr: shunt_delta(p, &shunt, w_minus),
    };
    plus.validate()?;
    minus.validate()?;
    Ok((plus, minus))
}

/// Runs every stage the data supports. `delta` is the probe offset δ (rad/s).
pub fn analyze(
    p: &SystemParams,
    delta: f64,
    data: &CalibrationData,
    s: &CalibrationSettings,
) -> Result<CalibrationReport> {
    let mut rep = CalibrationReport {
        inputs: data.inputs.clone(),
        ..Default::default()
    };

    let mut c_out = s.c_out_f;
    if let Some((w, db)) = &data.s21 {
        let fit = fit_shunt_capacitance(p, s.r_l_ohm, w, db)?;
        c_out = fit.c_out;
        rep.c_out_f = Some(fit.c_out);
        rep.c_out_sigma_f = Some(fit.c_out_sigma);
        let shunt = ShuntModel::new(fit.c_out.max(0.0), s.r_l_ohm)?;
        rep.pump_ratio_db = Some(transmission_ratio_db(p, &shunt, p.omega_m() + delta));
    }
    let (plus, minus) = pump_channels(p, delta, s, c_out.max(0.0))?;
    rep.delta_plus = Some(plus.delta_corr);
    rep.delta_minus = Some(minus.delta_corr);

    if !data.thermometry.is_empty() {
        let t = &data.thermometry;
        let n_m = t
            .iter()
            .map(|r| bose_occupation(p.omega_m(), r.temperature_k))
            .collect::<Result<Vec<_>>>()?;
        let rp: Vec<f64> = t.iter().map(|r| r.p_m_plus_w / r.p_thru_plus_w).collect();
        let rm: Vec<f64> = t.iter().map(|r| r.p_m_minus_w / r.p_thru_minus_w).collect();
        let fp = fit_thermometry(p, &plus, &n_m, &rp)?;
        let fm = fit_thermometry(p, &minus, &n_m, &rm)?;
        let (wp, wm) = (fp.g0_sigma.powi(-2), fm.g0_sigma.powi(-2));
        let (g0, sigma) = if wp.is_finite() && wm.is_finite() {
            ((wp * fp.g0 + wm * fm.g0) / (wp + wm), (wp + wm).powf(-0.5))
        } else {
            (0.5 * (fp.g0 + fm.g0), 0.0)
        };
        rep.g0_thermometry_hz = Some(g0 / TWO_PI);
        rep.g0_thermometry_sigma_hz = Some(sigma / TWO_PI);
        rep.g0_plus_hz = Some(fp.g0 / TWO_PI);
        rep.g0_minus_hz = Some(fm.g0 / TWO_PI);
        rep.conversion_plus = Some(fp.conversion);
        rep.conversion_minus = Some(fm.conversion);
        // n⁻ − n⁺ = 2n_eff + 1
        let diff: f64 = rp
            .iter()
            .zip(&rm)
            .map(|(a, b)| b * fm.conversion - a * fp.conversion)
            .sum::<f64>()
            / rp.len() as f64;
        rep.n_eff = Some(0.5 * (diff - 1.0));
    }

    if !data.linewidth.is_empty() {
        let n_p: Vec<f64> = data
            .linewidth
            .iter()
            .map(|(pw, _)| plus.photons_from_through_power(p, *pw))
            .collect();
        let gamma: Vec<f64> = data.linewidth.iter().map(|(_, g)| *g).collect();
        let fit = fit_linewidth_vs_power(&n_p, &gamma, None)?;
        rep.gamma_m_hz = Some(fit.gamma_m / TWO_PI);
        rep.g0_linewidth_hz = Some(g0_from_linewidth_slope(p, fit.slope)? / TWO_PI);
    }

    if let Some(floor) = &data.floor {
        let fit = fit_output_occupation(floor, p, s.alpha_r, s.lambda_per_w_hz)?;
        rep.n_r = Some(fit.n_r);
        rep.n_r_sigma = Some(fit.n_r_sigma);
        rep.s_hemt_w_per_hz = Some(fit.s_hemt);
    }
    Ok(rep)
}
