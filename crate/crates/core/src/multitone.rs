//! Balanced detuned probes plus a cooling tone: mechanical spectrum, averaged
//! occupation, the two sideband Lorentzians, and the complete twin-peak
//! spectrum with its overlap correction.
//!
//! Grids are offsets from the cavity resonance. The anti-Stokes peak (red
//! probe) sits at −δ, the Stokes peak (blue probe) at +δ.

use alloc::format;
use alloc::vec::Vec;
// Inherent float methods exist only when std is linked somewhere in the graph.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::{
    effective_mechanics_from_rate, BathSpec, Spectrum, SpectrumKind, SystemParams, ToneConfig,
};
use crate::scattering::{noise_floor, noise_floor_normal};

/// Rates and occupations derived from a tone configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultitoneRates {
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub gamma_cool: f64,
    /// γ_M = γ_m + γ_opt^cool
    pub gamma_m_eff: f64,
    /// n_M
    pub n_m_eff: f64,
    /// γ_tot = γ_M + γ_opt⁺ − γ_opt⁻
    pub gamma_tot: f64,
    /// n̄_m
    pub n_bar_m: f64,
    pub n_c: f64,
    pub n_eff: f64,
}

pub fn multitone_rates(
    p: &SystemParams,
    baths: &BathSpec,
    cfg: &ToneConfig,
) -> Result<MultitoneRates> {
    baths.validate()?;
    let gamma_plus = cfg.gamma_plus(p);
    let gamma_minus = cfg.gamma_minus(p);
    let gamma_cool = cfg.gamma_cool(p);
    let eff = effective_mechanics_from_rate(p, baths, gamma_cool);
    let gamma_tot = eff.gamma_m_eff + gamma_plus - gamma_minus;
    if gamma_tot <= 0.0 {
        return Err(Error::Instability { gamma_tot });
    }
    let n_c = baths.n_c(p);
    let n_bar_m =
        (eff.gamma_m_eff * eff.n_m_eff + gamma_minus * (n_c + 1.0) + gamma_plus * n_c) / gamma_tot;
    Ok(MultitoneRates {
        gamma_plus,
        gamma_minus,
        gamma_cool,
        gamma_m_eff: eff.gamma_m_eff,
        n_m_eff: eff.n_m_eff,
        gamma_tot,
        n_bar_m,
        n_c,
        n_eff: baths.n_eff(p),
    })
}

/// Symmetrized mechanical position spectrum (units of x_zp² per rad/s when
/// `x_zp` is unset) on a grid of mechanical offset frequencies.
pub fn sxx_spectrum(
    p: &SystemParams,
    baths: &BathSpec,
    cfg: &ToneConfig,
    grid: &[f64],
) -> Result<Spectrum> {
    let r = multitone_rates(p, baths, cfg)?;
    let x2 = p.x_zp_or_unit() * p.x_zp_or_unit();
    let bracket =
        (r.n_m_eff + 0.5) + (r.gamma_minus + r.gamma_plus) / r.gamma_m_eff * (r.n_c + 0.5);
    let values = grid
        .iter()
        .map(|&w| r.gamma_m_eff / (w * w + 0.25 * r.gamma_tot * r.gamma_tot) * bracket * x2)
        .collect();
    Spectrum::new(grid.to_vec(), values)
}

/// n̄_m = (γ_M/γ_tot)n_M + (γ_opt⁻/γ_tot)(n_c+1) + (γ_opt⁺/γ_tot)n_c.
pub fn averaged_occupation(p: &SystemParams, baths: &BathSpec, cfg: &ToneConfig) -> Result<f64> {
    Ok(multitone_rates(p, baths, cfg)?.n_bar_m)
}

/// Anti-Stokes and Stokes Lorentzians (floor excluded) plus the floor.
#[derive(Debug, Clone, PartialEq)]
pub struct MultitoneSpectra {
    pub anti_stokes: Spectrum,
    pub stokes: Spectrum,
    pub floor: f64,
    pub gamma_tot: f64,
    pub n_bar_m: f64,
    pub kind: SpectrumKind,
    /// ∫dω/2π of the anti-Stokes Lorentzian, (κ_R/κ)γ_opt⁺·bracket.
    pub anti_stokes_weight: f64,
    /// ∫dω/2π of the Stokes Lorentzian, (κ_R/κ)γ_opt⁻·bracket.
    pub stokes_weight: f64,
}

impl MultitoneSpectra {
    /// Floor plus both Lorentzians.
    pub fn total(&self) -> Spectrum {
        let values = self
            .anti_stokes
            .values()
            .iter()
            .zip(self.stokes.values())
            .map(|(a, s)| self.floor + a + s)
            .collect();
        Spectrum::new(self.anti_stokes.freq_offsets().to_vec(), values)
            .expect("finite by construction")
    }
}

fn require_separated(cfg: &ToneConfig, gamma: f64) -> Result<()> {
    if !cfg.allow_close_sidebands() && cfg.delta() <= 10.0 * gamma {
        return Err(Error::Validity(format!(
            "sidebands overlap: delta = {} rad/s must exceed 10 gamma_tot = {} rad/s",
            cfg.delta(),
            10.0 * gamma
        )));
    }
    Ok(())
}

/// Anti-Stokes and Stokes brackets for the given ordering.
pub fn sideband_brackets(r: &MultitoneRates, kind: SpectrumKind) -> (f64, f64) {
    let anti = r.n_bar_m - r.n_eff;
    let stokes = match kind {
        SpectrumKind::Symmetrized => r.n_bar_m + r.n_eff + 1.0,
        SpectrumKind::NormalOrdered => {
            r.n_bar_m
                + r.n_eff
                + r.gamma_m_eff / r.gamma_tot
                + (r.gamma_plus - r.gamma_minus) / r.gamma_tot
        }
    };
    (anti, stokes)
}

pub fn multitone_spectra(
    p: &SystemParams,
    baths: &BathSpec,
    cfg: &ToneConfig,
    kind: SpectrumKind,
    grid: &[f64],
) -> Result<MultitoneSpectra> {
    p.require_good_cavity()?;
    baths.require_physical_vacuum()?;
    let r = multitone_rates(p, baths, cfg)?;
    require_separated(cfg, r.gamma_tot)?;
    let x = p.kappa_r() / p.kappa();
    let (b_as, b_s) = sideband_brackets(&r, kind);
    let g = r.gamma_tot;
    let lorentz = |w: f64, rate: f64, bracket: f64| x * g * rate / (w * w + 0.25 * g * g) * bracket;
    let d = cfg.delta();
    let anti: Vec<f64> = grid
        .iter()
        .map(|&w| lorentz(w + d, r.gamma_plus, b_as))
        .collect();
    let stokes: Vec<f64> = grid
        .iter()
        .map(|&w| lorentz(w - d, r.gamma_minus, b_s))
        .collect();
    let floor = match kind {
        SpectrumKind::Symmetrized => noise_floor(p, baths),
        SpectrumKind::NormalOrdered => noise_floor_normal(p, baths),
    };
    Ok(MultitoneSpectra {
        anti_stokes: Spectrum::new(grid.to_vec(), anti)?,
        stokes: Spectrum::new(grid.to_vec(), stokes)?,
        floor,
        gamma_tot: g,
        n_bar_m: r.n_bar_m,
        kind,
        anti_stokes_weight: x * r.gamma_plus * b_as,
        stokes_weight: x * r.gamma_minus * b_s,
    })
}

/// δI = (κ_R/κ)[n̄_m(γ_opt⁻ − γ_opt⁺) + (n_eff+1)γ_opt⁻ + n_eff γ_opt⁺]; the
/// same for both orderings.
pub fn multitone_integrated_asymmetry(
    p: &SystemParams,
    baths: &BathSpec,
    cfg: &ToneConfig,
) -> Result<f64> {
    let r = multitone_rates(p, baths, cfg)?;
    let x = p.kappa_r() / p.kappa();
    Ok(x * (r.n_bar_m * (r.gamma_minus - r.gamma_plus)
        + (r.n_eff + 1.0) * r.gamma_minus
        + r.n_eff * r.gamma_plus))
}

/// Expected sideband ratio n⁻/n⁺ = 1 + (2n_eff + 1)/n⁺.
pub fn sideband_ratio_model(n_m_plus: f64, n_eff: f64) -> Result<f64> {
    if !(n_m_plus > 0.0) {
        return Err(Error::invalid(
            "n_m_plus",
            format!("must be > 0, got {n_m_plus}"),
        ));
    }
    Ok(1.0 + (2.0 * n_eff + 1.0) / n_m_plus)
}

/// Components of the complete rotating-wave twin-peak spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct TwinPeakSpectrum {
    pub grid: Vec<f64>,
    pub floor: f64,
    pub mixing: Vec<f64>,
    pub anti_stokes: Vec<f64>,
    pub stokes: Vec<f64>,
}

impl TwinPeakSpectrum {
    pub fn total(&self) -> Spectrum {
        let values = (0..self.grid.len())
            .map(|i| self.floor + self.mixing[i] + self.anti_stokes[i] + self.stokes[i])
            .collect();
        Spectrum::new(self.grid.clone(), values).expect("finite by construction")
    }
}

fn require_balanced(cfg: &ToneConfig) -> Result<()> {
    let g_plus = cfg.red_probe().map_or(0.0, |t| t.g());
    let g_minus = cfg.blue_probe().map_or(0.0, |t| t.g());
    if (g_plus - g_minus).abs() > 1e-12 * g_plus.abs().max(g_minus.abs()) {
        return Err(Error::Unbalanced { g_minus, g_plus });
    }
    Ok(())
}

/// Full symmetrized spectrum with both sidebands coupled through the
/// mechanics, valid for any δ (no separation gate). Requires balanced probes.
pub fn full_rwa_spectrum(
    p: &SystemParams,
    baths: &BathSpec,
    cfg: &ToneConfig,
    grid: &[f64],
) -> Result<TwinPeakSpectrum> {
    p.require_good_cavity()?;
    baths.require_physical_vacuum()?;
    require_balanced(cfg)?;
    let r = multitone_rates(p, baths, cfg)?;
    let x = p.kappa_r() / p.kappa();
    let gm = r.gamma_m_eff;
    let q = 0.25 * gm * gm;
    let gopt = r.gamma_plus;
    let d = cfg.delta();
    let mut mixing = Vec::with_capacity(grid.len());
    let mut anti = Vec::with_capacity(grid.len());
    let mut stokes = Vec::with_capacity(grid.len());
    for &w in grid {
        let lp = (w + d) * (w + d) + q;
        let lm = (w - d) * (w - d) + q;
        mixing.push(-4.0 * x * gopt * gopt * ((w - d) * (w + d) + q) / (lp * lm) * (r.n_c + 0.5));
        anti.push(x * gm * gopt / lp * (r.n_bar_m - r.n_eff));
        stokes.push(x * gm * gopt / lm * (r.n_bar_m + r.n_eff + 1.0));
    }
    Ok(TwinPeakSpectrum {
        grid: grid.to_vec(),
        floor: noise_floor(p, baths),
        mixing,
        anti_stokes: anti,
        stokes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Stokes,
    AntiStokes,
}

/// Ratio of the floor-subtracted twin-peak maximum to the isolated
/// single-Lorentzian peak at ±δ:
/// 1 + [(4δ/γ_M)² + 1]⁻¹·(n_M − n_opt + (1∓1)/2)/(n_M + n_opt + (1±1)/2),
/// n_opt = (γ_opt/γ_M)(2n_c + 1) ± n_eff; upper signs for the Stokes side.
pub fn peak_ratio_correction(
    p: &SystemParams,
    baths: &BathSpec,
    cfg: &ToneConfig,
    side: Side,
) -> Result<f64> {
    require_balanced(cfg)?;
    let r = multitone_rates(p, baths, cfg)?;
    let s = match side {
        Side::Stokes => 1.0,
        Side::AntiStokes => -1.0,
    };
    let n_opt = r.gamma_plus / r.gamma_m_eff * (2.0 * r.n_c + 1.0) + s * r.n_eff;
    let sep = 4.0 * cfg.delta() / r.gamma_m_eff;
    let num = r.n_m_eff - n_opt + 0.5 * (1.0 - s);
    let den = r.n_m_eff + n_opt + 0.5 * (1.0 + s);
    Ok(1.0 + num / den / (sep * sep + 1.0))
}

/// Isolated single-Lorentzian peak value at ±δ, (κ_R/κ)(4γ_opt/γ_M)·bracket.
pub fn single_peak_value(
    p: &SystemParams,
    baths: &BathSpec,
    cfg: &ToneConfig,
    side: Side,
) -> Result<f64> {
    require_balanced(cfg)?;
    let r = multitone_rates(p, baths, cfg)?;
    let x = p.kappa_r() / p.kappa();
    let bracket = match side {
        Side::Stokes => r.n_bar_m + r.n_eff + 1.0,
        Side::AntiStokes => r.n_bar_m - r.n_eff,
    };
    Ok(x * 4.0 * r.gamma_plus / r.gamma_m_eff * bracket)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{linspace, ToneRole, ToneSpec};
    use crate::TWO_PI;
    use alloc::vec;

    fn si() -> SystemParams {
        SystemParams::new(
            TWO_PI * 5.4e9,
            TWO_PI * 4e6,
            TWO_PI * 16.0,
            TWO_PI * 155e3,
            TWO_PI * 450e3,
            TWO_PI * 265e3,
            TWO_PI * 10.0,
        )
        .unwrap()
    }

    fn g_for(p: &SystemParams, gamma: f64) -> f64 {
        (gamma * p.kappa() / 4.0).sqrt()
    }

    fn config(p: &SystemParams, gp: f64, gm: f64, gc: f64, delta: f64) -> ToneConfig {
        let w = p.omega_m();
        let mut tones = vec![
            ToneSpec::from_coupling(-w - delta, g_for(p, gp), ToneRole::RedProbe).unwrap(),
            ToneSpec::from_coupling(w + delta, g_for(p, gm), ToneRole::BlueProbe).unwrap(),
        ];
        if gc > 0.0 {
            tones.push(
                ToneSpec::from_coupling(-w - 6.0 * delta, g_for(p, gc), ToneRole::Cooling).unwrap(),
            );
        }
        ToneConfig::new(p, tones, delta, 6.0 * delta, false).unwrap()
    }

    #[test]
    fn probes_off_give_thermal_mechanics() {
        let p = si();
        let b = BathSpec::thermal(0.3, 0.3, 0.1, 50.0);
        let cfg = config(&p, 0.0, 0.0, TWO_PI * 350.0, TWO_PI * 5e3);
        let r = multitone_rates(&p, &b, &cfg).unwrap();
        assert!((averaged_occupation(&p, &b, &cfg).unwrap() - r.n_m_eff).abs() < 1e-12);
        let s = sxx_spectrum(&p, &b, &cfg, &[0.0]).unwrap();
        let expect = r.gamma_m_eff / (0.25 * r.gamma_m_eff * r.gamma_m_eff) * (r.n_m_eff + 0.5);
        assert!((s.values()[0] / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sxx_bracket_doubles_for_matched_baths() {
        let p = si();
        let gm = TWO_PI * 360.0;
        // n_M = n_c and γ± = γ_M/2
        let b = BathSpec::thermal(2.0, 2.0, 2.0, 2.0);
        let cfg = config(&p, gm / 2.0 - 0.0, gm / 2.0, gm - p.gamma_m(), TWO_PI * 5e3);
        let r = multitone_rates(&p, &b, &cfg).unwrap();
        assert!((r.gamma_tot / r.gamma_m_eff - 1.0).abs() < 1e-12);
        let s = sxx_spectrum(&p, &b, &cfg, &[0.0]).unwrap();
        let expect = r.gamma_m_eff / (0.25 * r.gamma_m_eff * r.gamma_m_eff) * 2.0 * (2.0 + 0.5);
        assert!((s.values()[0] / expect - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sxx_quadrature() {
        let p = si();
        let b = BathSpec::thermal(0.3, 0.3, 0.1, 50.0);
        let cfg = config(
            &p,
            TWO_PI * 40.0,
            TWO_PI * 30.0,
            TWO_PI * 100.0,
            TWO_PI * 5e3,
        );
        let r = multitone_rates(&p, &b, &cfg).unwrap();
        let span = 50.0 * r.gamma_tot;
        let grid = linspace(-span, span, 40001);
        let s = sxx_spectrum(&p, &b, &cfg, &grid).unwrap();
        let tail =
            2.0 * s.values()[0] * (span * span + 0.25 * r.gamma_tot * r.gamma_tot) / span / TWO_PI;
        let q = s.integrate() + tail;
        let bracket =
            (r.n_m_eff + 0.5) + (r.gamma_minus + r.gamma_plus) / r.gamma_m_eff * (r.n_c + 0.5);
        let exact = r.gamma_m_eff / r.gamma_tot * bracket;
        assert!((q / exact - 1.0).abs() < 1e-4);
    }

    #[test]
    fn backaction_heating_by_blue_probe() {
        let p = si();
        let b = BathSpec::thermal(0.0, 0.0, 0.0, 7.0);
        let g = TWO_PI * 20.0;
        let cfg = config(&p, g, g, 0.0, TWO_PI * 5e3);
        let n = averaged_occupation(&p, &b, &cfg).unwrap();
        assert!((n - (7.0 + g / p.gamma_m())).abs() < 1e-12);
    }

    #[test]
    fn main_text_occupation_form() {
        let p = si();
        let b = BathSpec::thermal(0.3, 0.3, 0.1, 104.0);
        let g = TWO_PI * 30.0;
        let gc = TWO_PI * 350.0;
        let cfg = config(&p, g, g, gc, TWO_PI * 5e3);
        let n_c = b.n_c(&p);
        let gt = p.gamma_m() + gc;
        let main = p.gamma_m() / gt * b.n_m + g / gt * (2.0 * n_c + 1.0) + gc / gt * n_c;
        assert!((averaged_occupation(&p, &b, &cfg).unwrap() - main).abs() < 1e-12);
    }

    #[test]
    fn brackets_coincide_for_balanced_probes() {
        let p = si();
        let b = BathSpec::thermal(0.3, 0.3, 0.1, 104.0);
        let g = TWO_PI * 30.0;
        let cfg = config(&p, g, g, TWO_PI * 350.0, TWO_PI * 5e3);
        let r = multitone_rates(&p, &b, &cfg).unwrap();
        assert_eq!(
            sideband_brackets(&r, SpectrumKind::Symmetrized),
            sideband_brackets(&r, SpectrumKind::NormalOrdered)
        );
    }

    #[test]
    fn separation_gate() {
        let p = si();
        let b = BathSpec::vacuum();
        let g = TWO_PI * 30.0;
        let w = p.omega_m();
        let d = 5.0 * p.gamma_m();
        let tones = vec![
            ToneSpec::from_coupling(-w - d, g_for(&p, g), ToneRole::RedProbe).unwrap(),
            ToneSpec::from_coupling(w + d, g_for(&p, g), ToneRole::BlueProbe).unwrap(),
        ];
        let cfg = ToneConfig::new(&p, tones.clone(), d, 0.0, false).unwrap();
        assert!(matches!(
            multitone_spectra(&p, &b, &cfg, SpectrumKind::Symmetrized, &[0.0]),
            Err(Error::Validity(_))
        ));
        let cfg = ToneConfig::new(&p, tones, d, 0.0, true).unwrap();
        assert!(multitone_spectra(&p, &b, &cfg, SpectrumKind::Symmetrized, &[0.0]).is_ok());
    }

    #[test]
    fn ratio_model_examples() {
        assert_eq!(sideband_ratio_model(1.0, 0.0).unwrap(), 2.0);
        assert!((sideband_ratio_model(1e12, 3.0).unwrap() - 1.0).abs() < 1e-11);
        assert!(sideband_ratio_model(0.0, 3.0).is_err());
        let r = sideband_ratio_model(4.7 - 2.5, 2.5).unwrap();
        assert!((r - 3.727).abs() < 1e-3);
    }

    #[test]
    fn unbalanced_twin_peak_is_rejected() {
        let p = si();
        let cfg = config(&p, TWO_PI * 30.0, TWO_PI * 31.0, 0.0, TWO_PI * 5e3);
        assert!(matches!(
            full_rwa_spectrum(&p, &BathSpec::vacuum(), &cfg, &[0.0]),
            Err(Error::Unbalanced { .. })
        ));
    }

    #[test]
    fn decoupled_twin_peak_is_flat() {
        let p = si();
        let b = BathSpec::thermal(0.3, 0.3, 0.1, 10.0);
        let cfg = config(&p, 0.0, 0.0, TWO_PI * 350.0, TWO_PI * 5e3);
        let t = full_rwa_spectrum(&p, &b, &cfg, &linspace(-1e5, 1e5, 21))
            .unwrap()
            .total();
        let f = noise_floor(&p, &b);
        assert!(t.values().iter().all(|v| (v - f).abs() < 1e-15));
    }

    #[test]
    fn correction_at_quarter_linewidth() {
        // δ = γ_M/4 makes the prefactor [(4δ/γ_M)² + 1]⁻¹ exactly 1/2.
        let p = si();
        let b = BathSpec::thermal(0.3, 0.3, 0.1, 10.0);
        let gc = TWO_PI * 350.0;
        let gm = p.gamma_m() + gc;
        let w = p.omega_m();
        let g = g_for(&p, TWO_PI * 30.0);
        let d = gm / 4.0;
        let tones = vec![
            ToneSpec::from_coupling(-w - d, g, ToneRole::RedProbe).unwrap(),
            ToneSpec::from_coupling(w + d, g, ToneRole::BlueProbe).unwrap(),
            ToneSpec::from_coupling(-w - 2.0 * d, g_for(&p, gc), ToneRole::Cooling).unwrap(),
        ];
        let cfg = ToneConfig::new(&p, tones, d, 2.0 * d, true).unwrap();
        let r = multitone_rates(&p, &b, &cfg).unwrap();
        for side in [Side::Stokes, Side::AntiStokes] {
            let s = if side == Side::Stokes { 1.0 } else { -1.0 };
            let n_opt = r.gamma_plus / gm * (2.0 * r.n_c + 1.0) + s * r.n_eff;
            let expect = 1.0
                + 0.5 * (r.n_m_eff - n_opt + 0.5 * (1.0 - s))
                    / (r.n_m_eff + n_opt + 0.5 * (1.0 + s));
            let got = peak_ratio_correction(&p, &b, &cfg, side).unwrap();
            assert!((got - expect).abs() < 1e-15);
            // and against the twin-peak spectrum evaluated directly
            let at = s * d;
            let tw = full_rwa_spectrum(&p, &b, &cfg, &[at])
                .unwrap()
                .total()
                .values()[0]
                - noise_floor(&p, &b);
            let single = single_peak_value(&p, &b, &cfg, side).unwrap();
            assert!((tw / single - got).abs() < 1e-12);
        }
    }
}
