//! Output-line shunt capacitance and the transmission skew it causes.
//!
//! S21(ω) = S21⁰(ω) + 2R_L·jω_c·C_out with the bare Lorentzian
//! S21⁰(ω) = −√(κ_Rκ_L)/(j(ω − ω_c) + κ/2). The skew makes the pump
//! transmission differ by 1 + Δ(ω) on either side of the cavity.

use num_complex::Complex64;
// Inherent float methods exist only when std is linked somewhere in the graph.
#[allow(unused_imports)]
use num_traits::Float;

use super::fit::{gauss_newton, GnOptions};
use crate::error::{Error, Result};
use crate::model::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShuntModel {
    /// Farads.
    pub c_out: f64,
    /// Ohms.
    pub r_l: f64,
}

impl Default for ShuntModel {
    fn default() -> Self {
        Self {
            c_out: 0.0,
            r_l: 50.0,
        }
    }
}

impl ShuntModel {
    pub fn new(c_out: f64, r_l: f64) -> Result<Self> {
        if !(c_out >= 0.0) {
            return Err(Error::invalid("c_out", "must be >= 0"));
        }
        if !(r_l > 0.0) {
            return Err(Error::invalid("r_l", "must be > 0"));
        }
        Ok(Self { c_out, r_l })
    }

    /// The dimensionless shunt term 2R_L·ω_c·C_out.
    fn term(&self, p: &SystemParams) -> f64 {
        2.0 * self.r_l * p.omega_c() * self.c_out
    }
}

/// Bare Lorentzian transmission at absolute frequency `omega`.
pub fn s21_bare(p: &SystemParams, omega: f64) -> Complex64 {
    let d = Complex64::new(0.5 * p.kappa(), omega - p.omega_c());
    -(p.kappa_r() * p.kappa_l()).sqrt() / d
}

pub fn s21_shunt(p: &SystemParams, shunt: &ShuntModel, omega: f64) -> Complex64 {
    s21_bare(p, omega) + Complex64::new(0.0, shunt.term(p))
}

/// Δ(ω) = 4R_Lω_cC_out·(κ/√(κ_Lκ_R))·((ω − ω_c)/κ).
pub fn shunt_delta(p: &SystemParams, shunt: &ShuntModel, omega: f64) -> f64 {
    2.0 * shunt.term(p) * (omega - p.omega_c()) / (p.kappa_l() * p.kappa_r()).sqrt()
}

/// |S21(ω_c + offset)|²/|S21(ω_c − offset)|² in dB.
pub fn transmission_ratio_db(p: &SystemParams, shunt: &ShuntModel, offset: f64) -> f64 {
    let up = s21_shunt(p, shunt, p.omega_c() + offset).norm_sqr();
    let down = s21_shunt(p, shunt, p.omega_c() - offset).norm_sqr();
    10.0 * (up / down).log10()
}

/// Δ from a measured ratio (1 + Δ)/(1 − Δ) given in dB, using Δ(ω_−) = −Δ(ω_+).
pub fn delta_from_ratio_db(ratio_db: f64) -> f64 {
    let r = 10f64.powf(ratio_db / 10.0);
    (r - 1.0) / (r + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShuntFit {
    pub c_out: f64,
    pub c_out_sigma: f64,
    /// Fitted overall gain of the trace, dB.
    pub offset_db: f64,
    pub residual_norm: f64,
}

/// Fits C_out (and a constant gain offset) to |S21| data in dB at absolute
/// frequencies `omega`.
pub fn fit_shunt_capacitance(
    p: &SystemParams,
    r_l: f64,
    omega: &[f64],
    s21_db: &[f64],
) -> Result<ShuntFit> {
    if omega.len() != s21_db.len() {
        return Err(Error::invalid(
            "s21 trace",
            "frequency and magnitude lengths differ",
        ));
    }
    // fit C in femtofarads so both parameters are O(1)
    const FF: f64 = 1e-15;
    let db = 20.0 / core::f64::consts::LN_10;
    let dterm = Complex64::new(0.0, 2.0 * r_l * p.omega_c() * FF);
    let res = gauss_newton(
        &[1.0, 0.0],
        omega.len(),
        |q, r, j| {
            let shunt = ShuntModel {
                c_out: q[0] * FF,
                r_l,
            };
            for (i, &w) in omega.iter().enumerate() {
                let s = s21_shunt(p, &shunt, w);
                let n2 = s.norm_sqr();
                r[i] = 10.0 * n2.log10() + q[1] - s21_db[i];
                j[2 * i] = db * (s.conj() * dterm).re / n2;
                j[2 * i + 1] = 1.0;
            }
        },
        &GnOptions::default(),
    )?;
    Ok(ShuntFit {
        c_out: res.params[0] * FF,
        c_out_sigma: res.sigma(0) * FF,
        offset_db: res.params[1],
        residual_norm: res.rss.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::linspace;
    use crate::TWO_PI;
    use alloc::vec::Vec;

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

    #[test]
    fn no_shunt_is_bare_lorentzian() {
        let p = si();
        let s = ShuntModel::default();
        for w in linspace(
            p.omega_c() - 5.0 * p.kappa(),
            p.omega_c() + 5.0 * p.kappa(),
            101,
        ) {
            assert_eq!(s21_shunt(&p, &s, w), s21_bare(&p, w));
        }
        assert!(
            (s21_bare(&p, p.omega_c()).re + 2.0 * (p.kappa_r() * p.kappa_l()).sqrt() / p.kappa())
                .abs()
                < 1e-15
        );
    }

    #[test]
    fn converges_to_bare_as_capacitance_vanishes() {
        let p = si();
        let grid = linspace(
            p.omega_c() - 5.0 * p.kappa(),
            p.omega_c() + 5.0 * p.kappa(),
            201,
        );
        let sup = |c: f64| {
            let s = ShuntModel::new(c, 50.0).unwrap();
            grid.iter()
                .map(|&w| (s21_shunt(&p, &s, w) - s21_bare(&p, w)).norm())
                .fold(0.0, f64::max)
        };
        assert!(sup(1e-18) < sup(1e-15) * 1.01e-3);
        assert!(sup(1e-24) < 1e-11);
    }

    #[test]
    fn delta_is_antisymmetric_about_the_cavity() {
        let p = si();
        let s = ShuntModel::new(2.7e-15, 50.0).unwrap();
        let off = p.omega_m() + TWO_PI * 500.0;
        let r = shunt_delta(&p, &s, p.omega_c() + off) / shunt_delta(&p, &s, p.omega_c() - off);
        assert!((r + 1.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_db_inversion() {
        assert!((delta_from_ratio_db(2.6) - 0.2907).abs() < 1e-3);
        assert_eq!(delta_from_ratio_db(0.0), 0.0);
    }

    #[test]
    fn capacitance_fit_recovers_truth() {
        let p = si();
        let truth = ShuntModel::new(2.7e-15, 50.0).unwrap();
        let grid = linspace(
            p.omega_c() - 8.0 * p.omega_m(),
            p.omega_c() + 8.0 * p.omega_m(),
            801,
        );
        let db: Vec<f64> = grid
            .iter()
            .map(|&w| 10.0 * s21_shunt(&p, &truth, w).norm_sqr().log10() - 3.0)
            .collect();
        let f = fit_shunt_capacitance(&p, 50.0, &grid, &db).unwrap();
        assert!((f.c_out / truth.c_out - 1.0).abs() < 1e-9);
        assert!((f.offset_db + 3.0).abs() < 1e-9);
    }
}
