//! Noise-floor bookkeeping: the floor increase Δη produced by thermal cavity
//! noise, the sideband difference and average it feeds, and the broadband
//! floor fit that measures the output-line occupation n_R.
//!
//! λ converts detected spectral density (e.g. W/Hz) to quanta.

use alloc::format;
use alloc::vec::Vec;
// Inherent float methods exist only when std is linked somewhere in the graph.
#[allow(unused_imports)]
use num_traits::Float;

use super::fit::{gauss_newton, GnOptions};
use crate::error::{Error, Result};
use crate::model::{BathSpec, Spectrum, SystemParams, ToneConfig};
use crate::multitone::multitone_rates;

fn require_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) {
        return Err(Error::invalid(
            "lambda",
            format!("must be > 0, got {lambda}"),
        ));
    }
    Ok(())
}

/// Δη = (1/2λ)[n_eff − ((2κ_R − κ)/(2κ_R))n_R].
pub fn noise_floor_increase(p: &SystemParams, baths: &BathSpec, lambda: f64) -> Result<f64> {
    require_lambda(lambda)?;
    let (kr, k) = (p.kappa_r(), p.kappa());
    Ok((baths.n_eff(p) - (2.0 * kr - k) / (2.0 * kr) * baths.n_r) / (2.0 * lambda))
}

/// Offset the output-line occupation adds to the sideband difference,
/// ((2κ_R − κ)/κ_R)·n_R.
pub fn difference_offset(p: &SystemParams, n_r: f64) -> f64 {
    (2.0 * p.kappa_r() - p.kappa()) / p.kappa_r() * n_r
}

/// Sideband difference n⁻ − n⁺ and average (n⁻ + n⁺)/2 in terms of the
/// floor increase Δη. Assumes balanced probes.
pub fn sideband_difference_and_average(
    p: &SystemParams,
    baths: &BathSpec,
    cfg: &ToneConfig,
    lambda: f64,
    delta_eta: f64,
) -> Result<(f64, f64)> {
    require_lambda(lambda)?;
    let g_plus = cfg.red_probe().map_or(0.0, |t| t.g());
    let g_minus = cfg.blue_probe().map_or(0.0, |t| t.g());
    if (g_plus - g_minus).abs() > 1e-12 * g_plus.abs().max(g_minus.abs()) {
        return Err(Error::Unbalanced { g_minus, g_plus });
    }
    let r = multitone_rates(p, baths, cfg)?;
    let (kr, k) = (p.kappa_r(), p.kappa());
    let diff = 4.0 * lambda * delta_eta + difference_offset(p, baths.n_r) + 1.0;
    let gm = r.gamma_m_eff;
    let g = r.gamma_plus;
    let avg = (2.0 * g + r.gamma_cool) / gm
        * (lambda * delta_eta + (4.0 * kr - k) / (4.0 * kr) * baths.n_r)
        + p.gamma_m() / gm * baths.n_m
        + g / gm
        + 0.5;
    Ok((diff, avg))
}

/// Broadband floor S̄_V(ν) = (1/λ)[κ²/(κ² + 4ν²)(κ_R/κ − 1)n_R + (κ/4κ_R)(α_R + 2n_R)] + S_HEMT
/// at offset ν from the cavity.
pub fn output_floor_model(
    p: &SystemParams,
    n_r: f64,
    alpha_r: f64,
    lambda: f64,
    s_hemt: f64,
    nu: f64,
) -> f64 {
    let (kr, k) = (p.kappa_r(), p.kappa());
    let lor = k * k / (k * k + 4.0 * nu * nu);
    (lor * (kr / k - 1.0) * n_r + k / (4.0 * kr) * (alpha_r + 2.0 * n_r)) / lambda + s_hemt
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloorFit {
    pub n_r: f64,
    pub n_r_sigma: f64,
    pub s_hemt: f64,
    pub s_hemt_sigma: f64,
    pub residual_norm: f64,
}

/// Fits (n_R, S_HEMT) to a floor spectrum measured over at least 3κ.
pub fn fit_output_occupation(
    spec: &Spectrum,
    p: &SystemParams,
    alpha_r: f64,
    lambda: f64,
) -> Result<FloorFit> {
    require_lambda(lambda)?;
    let x = spec.freq_offsets();
    let y = spec.values();
    if x.is_empty() || x[x.len() - 1] - x[0] < 3.0 * p.kappa() {
        return Err(Error::DegenerateData(
            "floor spectrum must span at least 3 kappa".into(),
        ));
    }
    // Work in units of 1/λ so both parameters are O(1).
    let yq: Vec<f64> = y.iter().map(|v| v * lambda).collect();
    let (kr, k) = (p.kappa_r(), p.kappa());
    let res = gauss_newton(
        &[0.0, yq.iter().fold(f64::INFINITY, |m, v| m.min(*v))],
        x.len(),
        |q, r, j| {
            for (i, &nu) in x.iter().enumerate() {
                let lor = k * k / (k * k + 4.0 * nu * nu);
                let dn = lor * (kr / k - 1.0) + k / (2.0 * kr);
                r[i] = dn * q[0] + k / (4.0 * kr) * alpha_r + q[1] - yq[i];
                j[2 * i] = dn;
                j[2 * i + 1] = 1.0;
            }
        },
        &GnOptions::default(),
    )?;
    Ok(FloorFit {
        n_r: res.params[0],
        n_r_sigma: res.sigma(0),
        s_hemt: res.params[1] / lambda,
        s_hemt_sigma: res.sigma(1) / lambda,
        residual_norm: res.rss.sqrt() / lambda,
    })
}
