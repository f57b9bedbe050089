//! Temperature-sweep thermometry and the linewidth-vs-power fit, both of
//! which pin down g0.
//!
//! A measurement channel is one pump tone: its frequency ω_±, the gain of the
//! readout chain at the pump and at the cavity, and the transmission
//! correction Δ(ω_±) from the output shunt.

use alloc::format;
use alloc::vec::Vec;
// Inherent float methods exist only when std is linked somewhere in the graph.
#[allow(unused_imports)]
use num_traits::Float;

use super::fit::{fit_line, LineFit};
use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Bose-Einstein occupation of a mode at `omega` (rad/s) and temperature (K).
pub fn bose_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) || !(omega > 0.0) {
        return Err(Error::invalid(
            "temperature",
            "temperature and frequency must be positive",
        ));
    }
    Ok(1.0 / (HBAR * omega / (K_B * temperature)).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpChannel {
    /// ω_± in rad/s (absolute).
    pub omega_pump: f64,
    /// G(ω_c), dimensionless power gain.
    pub gain_cavity: f64,
    /// G(ω_±).
    pub gain_pump: f64,
    /// Δ(ω_±).
    pub delta_corr: f64,
}

impl PumpChannel {
    pub fn validate(&self) -> Result<()> {
        if !(self.gain_cavity > 0.0 && self.gain_pump > 0.0) {
            return Err(Error::invalid("gain", "gains must be positive"));
        }
        if !(self.omega_pump > 0.0) {
            return Err(Error::invalid("omega_pump", "must be positive"));
        }
        if !(self.delta_corr > -1.0) {
            return Err(Error::invalid("delta_corr", "1 + delta must be positive"));
        }
        Ok(())
    }

    /// (ω_c/ω_±)(G(ω_c)/G(ω_±))/(1 + Δ(ω_±)).
    fn prefactor(&self, p: &SystemParams) -> f64 {
        p.omega_c() / self.omega_pump * self.gain_cavity / self.gain_pump / (1.0 + self.delta_corr)
    }

    /// Detected pump power P_thru = G(ω_±)·ħω_±·(1 + Δ(ω_±))·κ_R·n_p, in W.
    pub fn through_power(&self, p: &SystemParams, n_p: f64) -> f64 {
        self.gain_pump * HBAR * self.omega_pump * (1.0 + self.delta_corr) * p.kappa_r() * n_p
    }

    /// Inverse of [`Self::through_power`].
    pub fn photons_from_through_power(&self, p: &SystemParams, power: f64) -> f64 {
        power / (self.gain_pump * HBAR * self.omega_pump * (1.0 + self.delta_corr) * p.kappa_r())
    }
}

/// P_m/P_thru = (ω_c/ω_±)(G(ω_c)/G(ω_±))(1 + Δ(ω_±))⁻¹(2g0/κ)²·n_m.
pub fn thermometry_ratio(p: &SystemParams, ch: &PumpChannel, n_m: f64) -> Result<f64> {
    ch.validate()?;
    let c = 2.0 * p.g0() / p.kappa();
    Ok(ch.prefactor(p) * c * c * n_m)
}

/// Occupation implied by a measured P_m/P_thru.
pub fn thermometry_occupation(p: &SystemParams, ch: &PumpChannel, ratio: f64) -> Result<f64> {
    ch.validate()?;
    let c = 2.0 * p.g0() / p.kappa();
    Ok(ratio / (ch.prefactor(p) * c * c))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermometryFit {
    pub line: LineFit,
    /// n_m = conversion·P_m/P_thru, i.e. 1/slope.
    pub conversion: f64,
    pub g0: f64,
    pub g0_sigma: f64,
}

/// Regresses P_m/P_thru against the bath occupation and inverts the slope
/// for g0 = (κ/2)√(slope·(ω_±/ω_c)(G(ω_±)/G(ω_c))(1 + Δ)).
pub fn fit_thermometry(
    p: &SystemParams,
    ch: &PumpChannel,
    n_m: &[f64],
    ratio: &[f64],
) -> Result<ThermometryFit> {
    ch.validate()?;
    let line = fit_line(n_m, ratio, None)?;
    if !(line.slope > 0.0) {
        return Err(Error::DegenerateData(format!(
            "non-positive thermometry slope {}",
            line.slope
        )));
    }
    let k = 0.5 * p.kappa();
    let g0 = k * (line.slope / ch.prefactor(p)).sqrt();
    // dg0/dslope = g0/(2 slope)
    let g0_sigma = g0 / (2.0 * line.slope) * line.slope_sigma;
    Ok(ThermometryFit {
        line,
        conversion: 1.0 / line.slope,
        g0,
        g0_sigma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinewidthFit {
    pub line: LineFit,
    /// Intercept, rad/s.
    pub gamma_m: f64,
    /// Slope in rad/s per unit of the abscissa.
    pub slope: f64,
}

/// γ_tot = γ_m + slope·x for a red-probe power sweep. With x the intracavity
/// photon number the slope is 4g0²/κ.
pub fn fit_linewidth_vs_power(
    x: &[f64],
    gamma_tot: &[f64],
    sigmas: Option<&[f64]>,
) -> Result<LinewidthFit> {
    let line = fit_line(x, gamma_tot, sigmas)?;
    Ok(LinewidthFit {
        line,
        gamma_m: line.intercept,
        slope: line.slope,
    })
}

/// g0 = √(κ·slope/4) for a slope measured per intracavity photon.
pub fn g0_from_linewidth_slope(p: &SystemParams, slope_per_photon: f64) -> Result<f64> {
    if !(slope_per_photon > 0.0) {
        return Err(Error::invalid("slope", "must be positive"));
    }
    Ok((0.25 * p.kappa() * slope_per_photon).sqrt())
}

/// Raw temperature-sweep data for both pump tones. Powers in W.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRun {
    pub temperatures: Vec<f64>,
    pub sideband_power_plus: Vec<f64>,
    pub sideband_power_minus: Vec<f64>,
    pub through_power_plus: Vec<f64>,
    pub through_power_minus: Vec<f64>,
    pub fit_plus: Option<ThermometryFit>,
    pub fit_minus: Option<ThermometryFit>,
    /// Inverse-variance mean of the two g0 estimates.
    pub g0: Option<f64>,
}

impl CalibrationRun {
    pub fn new(
        temperatures: Vec<f64>,
        sideband_power_plus: Vec<f64>,
        sideband_power_minus: Vec<f64>,
        through_power_plus: Vec<f64>,
        through_power_minus: Vec<f64>,
    ) -> Result<Self> {
        let n = temperatures.len();
        for v in [
            &sideband_power_plus,
            &sideband_power_minus,
            &through_power_plus,
            &through_power_minus,
        ] {
            if v.len() != n {
                return Err(Error::invalid(
                    "calibration run",
                    "all series must have one entry per temperature",
                ));
            }
            if v.iter().any(|x| !(*x > 0.0)) {
                return Err(Error::invalid("power", "powers must be positive"));
            }
        }
        if temperatures.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::invalid(
                "temperature",
                "temperatures must be positive",
            ));
        }
        Ok(Self {
            temperatures,
            sideband_power_plus,
            sideband_power_minus,
            through_power_plus,
            through_power_minus,
            fit_plus: None,
            fit_minus: None,
            g0: None,
        })
    }

    /// Fits both thermometry lines against the Bose occupation at ω_m.
    pub fn analyze(
        &mut self,
        p: &SystemParams,
        plus: &PumpChannel,
        minus: &PumpChannel,
    ) -> Result<()> {
        let n_m = self
            .temperatures
            .iter()
            .map(|&t| bose_occupation(p.omega_m(), t))
            .collect::<Result<Vec<_>>>()?;
        let ratio =
            |pm: &[f64], pt: &[f64]| pm.iter().zip(pt).map(|(a, b)| a / b).collect::<Vec<_>>();
        let fp = fit_thermometry(
            p,
            plus,
            &n_m,
            &ratio(&self.sideband_power_plus, &self.through_power_plus),
        )?;
        let fm = fit_thermometry(
            p,
            minus,
            &n_m,
            &ratio(&self.sideband_power_minus, &self.through_power_minus),
        )?;
        let g0 = if fp.g0_sigma > 0.0 && fm.g0_sigma > 0.0 {
            let (wp, wm) = (
                1.0 / (fp.g0_sigma * fp.g0_sigma),
                1.0 / (fm.g0_sigma * fm.g0_sigma),
            );
            (wp * fp.g0 + wm * fm.g0) / (wp + wm)
        } else {
            0.5 * (fp.g0 + fm.g0)
        };
        self.fit_plus = Some(fp);
        self.fit_minus = Some(fm);
        self.g0 = Some(g0);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TWO_PI;

    fn sys() -> SystemParams {
        SystemParams::new(
            TWO_PI * 5.4e9,
            TWO_PI * 4e6,
            TWO_PI * 16.0,
            TWO_PI * 150e3,
            TWO_PI * 450e3,
            TWO_PI * 260e3,
            TWO_PI * 10.0,
        )
        .unwrap()
    }

    #[test]
    fn unity_gains_isolate_the_coupling_term() {
        let p = sys();
        let w = p.omega_c() - p.omega_m();
        let ch = PumpChannel {
            omega_pump: w,
            gain_cavity: 1.0,
            gain_pump: 1.0,
            delta_corr: 0.0,
        };
        let c = 2.0 * p.g0() / p.kappa();
        let r = thermometry_ratio(&p, &ch, 500.0).unwrap();
        assert!((r / (c * c * 500.0 * p.omega_c() / w) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_round_trip() {
        let p = sys();
        let ch = PumpChannel {
            omega_pump: p.omega_c() + p.omega_m(),
            gain_cavity: 2.1,
            gain_pump: 1.7,
            delta_corr: 0.29,
        };
        for n in [0.5, 42.0, 1041.0] {
            let r = thermometry_ratio(&p, &ch, n).unwrap();
            assert!((thermometry_occupation(&p, &ch, r).unwrap() / n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bose_factor_high_temperature() {
        let w = TWO_PI * 4e6;
        let n = bose_occupation(w, 0.2).unwrap();
        assert!((n - K_B * 0.2 / (HBAR * w)).abs() < 1.0);
        assert!((n - 1041.0).abs() < 1.0);
        let n2 = bose_occupation(w, 0.1).unwrap();
        // linear in T up to the −1/2 offset
        assert!(((n + 0.5) / (n2 + 0.5) - 2.0).abs() < 1e-3);
    }

    #[test]
    fn thermometry_fit_recovers_g0() {
        let p = sys();
        let ch = PumpChannel {
            omega_pump: p.omega_c() - p.omega_m(),
            gain_cavity: 1e8,
            gain_pump: 1.1e8,
            delta_corr: -0.2,
        };
        let n: Vec<f64> = (1..=10).map(|k| 100.0 * k as f64).collect();
        let r: Vec<f64> = n
            .iter()
            .map(|&v| thermometry_ratio(&p, &ch, v + 3.0).unwrap())
            .collect();
        let f = fit_thermometry(&p, &ch, &n, &r).unwrap();
        assert!((f.g0 / p.g0() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn linewidth_slope_reproduces_coupling() {
        let p = SystemParams::new(
            TWO_PI * 5.4e9,
            TWO_PI * 4e6,
            TWO_PI * 16.0,
            TWO_PI * 150e3,
            TWO_PI * 450e3,
            TWO_PI * 270e3,
            TWO_PI * 10.0,
        )
        .unwrap();
        let n: Vec<f64> = (0..9).map(|k| 1e3 * 10f64.powf(k as f64 * 0.5)).collect();
        let slope = 4.0 * p.g0() * p.g0() / p.kappa();
        let g: Vec<f64> = n.iter().map(|&v| p.gamma_m() + slope * v).collect();
        let f = fit_linewidth_vs_power(&n, &g, None).unwrap();
        assert!((f.slope / slope - 1.0).abs() < 1e-6);
        assert!((g0_from_linewidth_slope(&p, f.slope).unwrap() / p.g0() - 1.0).abs() < 1e-6);
        let two = fit_linewidth_vs_power(&n[..2], &g[..2], None).unwrap();
        assert!((two.gamma_m / p.gamma_m() - 1.0).abs() < 1e-9);
    }
}
