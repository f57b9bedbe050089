//! Detector view of the same measurement: the cavity as a linear position
//! detector with imprecision noise S_II, backaction force noise S_FF, and
//! their cross-correlation S_IF. The sideband asymmetry shows up as a purely
//! imaginary S_zF = S_IF/χ_IF whose sign flips with the detuning.
//!
//! Frequencies handed to [`detector_correlators`] are in the frame rotating
//! with the drive, where the cavity sits at ω = Δ (Δ = +ω_m for a red drive).
//! The cavity susceptibility is therefore χ_c[ω] = [−i(ω − Δ) + κ/2]⁻¹.
//! Complex quantities are referred to the positive mechanical frequency: on
//! the ω < 0 branch (blue drive) χ_IF, S_IF and S_zF are conjugated.

use alloc::vec::Vec;
use num_complex::Complex64;
// Inherent float methods exist only when std is linked somewhere in the graph.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::{BathSpec, Sideband, Spectrum, SystemParams, ToneSpec};

/// Mechanical force susceptibility (1/m)/((ω² − ω_m²) + iωγ_m).
pub fn chi_xx(omega: f64, m: f64, omega_m: f64, gamma_m: f64) -> Complex64 {
    Complex64::new(1.0 / m, 0.0)
        / Complex64::new(omega * omega - omega_m * omega_m, omega * gamma_m)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LrOptions {
    /// Keep the χ_c[−ω] image terms (and the ν = − term of S_II). They are
    /// suppressed by ~κ/ω_m in the good-cavity limit; dropping them makes the
    /// imprecision floor coincide with the scattering floor.
    pub image_branch: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorNoise {
    pub chi_if: Complex64,
    pub s_ii: f64,
    pub s_ff: f64,
    pub s_if: Complex64,
    pub s_zf: Complex64,
    pub evaluated_at: f64,
}

impl DetectorNoise {
    /// Imprecision referred to the mechanics, S_zz = S_II/|χ_IF|².
    pub fn s_zz(&self) -> f64 {
        self.s_ii / self.chi_if.norm_sqr()
    }
}

fn require_two_port(p: &SystemParams) -> Result<()> {
    if p.kappa_i() != 0.0 {
        return Err(Error::invalid(
            "kappa_i",
            "the detector correlators assume a two-port cavity (kappa_i = 0)",
        ));
    }
    Ok(())
}

/// χ_IF, S̄_II, S̄_FF, S̄_IF at rotating-frame frequency `omega`.
pub fn detector_correlators(
    p: &SystemParams,
    baths: &BathSpec,
    tone: &ToneSpec,
    sideband: Sideband,
    omega: f64,
    opts: &LrOptions,
) -> Result<DetectorNoise> {
    p.require_good_cavity()?;
    require_two_port(p)?;
    baths.validate()?;
    let (kr, kl, k) = (p.kappa_r(), p.kappa_l(), p.kappa());
    let delta = sideband.sign() * p.omega_m();
    let chi_c = |w: f64| Complex64::new(1.0, 0.0) / Complex64::new(0.5 * k, -(w - delta));
    let xz = p.x_zp_or_unit();
    let g = tone.g();
    let a = kr.sqrt() * g / xz;
    let (hr, hl) = (0.5 + baths.n_r, 0.5 + baths.n_l);

    let cp = chi_c(omega);
    let cm = if opts.image_branch {
        chi_c(-omega)
    } else {
        Complex64::new(0.0, 0.0)
    };
    let one = Complex64::new(1.0, 0.0);

    let chi_if = Complex64::new(0.0, -a) * (cp - cm.conj());

    let ii_branch = |c: Complex64| (one - kr * c).norm_sqr() * hr + kr * kl * c.norm_sqr() * hl;
    let mut s_ii = ii_branch(cp);
    if opts.image_branch {
        s_ii += ii_branch(cm);
    }

    let s_ff = g * g / (xz * xz) * (cp.norm_sqr() + cm.norm_sqr()) * (kl * hl + kr * hr);

    // The cavity field driving the force enters both ports with the same
    // sign, so the left-port term carries +κ_L|χ_c|².
    let lambda_r = |c: Complex64| -(one - kr * c) * c.conj();
    let lambda_l = |c: Complex64| Complex64::new(kl * c.norm_sqr(), 0.0);
    let mut sum = lambda_r(cp) * hr + lambda_l(cp) * hl;
    if opts.image_branch {
        sum += (lambda_r(cm) * hr + lambda_l(cm) * hl).conj();
    }
    let s_if = -a * sum;

    let (mut chi_if, mut s_if) = (chi_if, s_if);
    if omega < 0.0 {
        chi_if = chi_if.conj();
        s_if = s_if.conj();
    }
    let s_zf = s_if / chi_if;
    Ok(DetectorNoise {
        chi_if,
        s_ii,
        s_ff,
        s_if,
        s_zf,
        evaluated_at: omega,
    })
}

fn mech_frequency(p: &SystemParams, sideband: Sideband, nu: f64) -> f64 {
    nu + sideband.sign() * p.omega_m()
}

/// Weak-coupling effective position spectrum
/// −Im χ_xx[ω]·((1 + 2n_m) + 2 Im S̄_zF) on a grid of offsets from the
/// cavity resonance. Cavity correlators are taken at resonance.
pub fn sxx_effective(
    p: &SystemParams,
    baths: &BathSpec,
    tone: &ToneSpec,
    sideband: Sideband,
    grid: &[f64],
    opts: &LrOptions,
) -> Result<Spectrum> {
    let det = detector_correlators(
        p,
        baths,
        tone,
        sideband,
        sideband.sign() * p.omega_m(),
        opts,
    )?;
    let m = p.mass();
    let values = grid
        .iter()
        .map(|&nu| {
            let w = mech_frequency(p, sideband, nu).abs();
            -chi_xx(w, m, p.omega_m(), p.gamma_m()).im
                * ((1.0 + 2.0 * baths.n_m) + 2.0 * det.s_zf.im)
        })
        .collect::<Vec<_>>();
    Spectrum::new(grid.to_vec(), values)
}

/// Backaction-driven position noise |χ_xx|²·S̄_FF, exposed on its own; it is
/// second order in the coupling and left out of the output spectrum.
pub fn sxx_backaction(
    p: &SystemParams,
    baths: &BathSpec,
    tone: &ToneSpec,
    sideband: Sideband,
    grid: &[f64],
    opts: &LrOptions,
) -> Result<Spectrum> {
    let det = detector_correlators(
        p,
        baths,
        tone,
        sideband,
        sideband.sign() * p.omega_m(),
        opts,
    )?;
    let m = p.mass();
    let values = grid
        .iter()
        .map(|&nu| {
            chi_xx(
                mech_frequency(p, sideband, nu).abs(),
                m,
                p.omega_m(),
                p.gamma_m(),
            )
            .norm_sqr()
                * det.s_ff
        })
        .collect::<Vec<_>>();
    Spectrum::new(grid.to_vec(), values)
}

/// Output spectrum S̄_II + |χ_IF|²·S_xx,eff, cavity correlators frozen at
/// resonance.
pub fn output_spectrum_lr(
    p: &SystemParams,
    baths: &BathSpec,
    tone: &ToneSpec,
    sideband: Sideband,
    grid: &[f64],
    opts: &LrOptions,
) -> Result<Spectrum> {
    let det = detector_correlators(
        p,
        baths,
        tone,
        sideband,
        sideband.sign() * p.omega_m(),
        opts,
    )?;
    let sxx = sxx_effective(p, baths, tone, sideband, grid, opts)?;
    let gain = det.chi_if.norm_sqr();
    let values = sxx.values().iter().map(|s| det.s_ii + gain * s).collect();
    Spectrum::new(grid.to_vec(), values)
}

/// Δ[y] = (|1 + y²| − (1 + |y|²))/2.
pub fn delta_factor(y: Complex64) -> f64 {
    0.5 * ((1.0 + y * y).norm() - (1.0 + y.norm_sqr()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConstraint {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

impl NoiseConstraint {
    pub fn gap(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// S_zz·S_FF − |S_zF|² ≥ ¼(1 + Δ[2S_zF]).
pub fn heisenberg_gap(s_zz: f64, s_ff: f64, s_zf: Complex64) -> Result<NoiseConstraint> {
    if !(s_zz >= 0.0) || !(s_ff >= 0.0) {
        return Err(Error::invalid(
            "s_zz/s_ff",
            "autospectra must be nonnegative",
        ));
    }
    let lhs = s_zz * s_ff - s_zf.norm_sqr();
    let rhs = 0.25 * (1.0 + delta_factor(2.0 * s_zf));
    Ok(NoiseConstraint {
        lhs,
        rhs,
        satisfied: lhs >= rhs - 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{linspace, ToneRole};
    use crate::scattering::{single_tone_spectrum, EvalOptions};
    use crate::{SpectrumKind, TWO_PI};

    fn sys() -> SystemParams {
        SystemParams::new(
            TWO_PI * 5.4e9,
            TWO_PI * 4e6,
            TWO_PI * 16.0,
            TWO_PI * 250e3,
            TWO_PI * 450e3,
            0.0,
            TWO_PI * 10.0,
        )
        .unwrap()
    }

    fn tone(p: &SystemParams, coop: f64, sb: Sideband) -> ToneSpec {
        let g = (coop * p.gamma_m() * p.kappa() / 4.0).sqrt();
        ToneSpec::from_coupling(-sb.sign() * p.omega_m(), g, ToneRole::Generic).unwrap()
    }

    fn at_resonance(p: &SystemParams, b: &BathSpec, sb: Sideband) -> DetectorNoise {
        detector_correlators(
            p,
            b,
            &tone(p, 0.3, sb),
            sb,
            sb.sign() * p.omega_m(),
            &LrOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn chi_xx_limits() {
        let (m, wm, g) = (2.0, 3.0, 0.1);
        assert!((chi_xx(0.0, m, wm, g) - Complex64::new(-1.0 / (m * wm * wm), 0.0)).norm() < 1e-15);
        let r = chi_xx(wm, m, wm, g);
        assert!(r.re.abs() < 1e-15);
        assert!((r.norm() - 1.0 / (m * wm * g)).abs() < 1e-12);
        for w in linspace(0.01, 10.0, 200) {
            assert!(chi_xx(w, m, wm, g).im < 0.0);
        }
    }

    #[test]
    fn szf_vacuum_is_half_quantum() {
        let p = sys();
        let b = BathSpec::vacuum();
        let r = at_resonance(&p, &b, Sideband::Red).s_zf;
        let bl = at_resonance(&p, &b, Sideband::Blue).s_zf;
        assert!((r - Complex64::new(0.0, -0.5)).norm() < 1e-12);
        assert!((bl - Complex64::new(0.0, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn szf_thermal_closed_form() {
        let p = sys();
        let b = BathSpec::thermal(0.7, 0.2, 0.0, 3.0);
        let x = 0.5 + 2.0 * b.n_c(&p) - b.n_r;
        let r = at_resonance(&p, &b, Sideband::Red);
        let bl = at_resonance(&p, &b, Sideband::Blue);
        assert!((r.s_zf - Complex64::new(0.0, -x)).norm() < 1e-12);
        assert_eq!(r.s_zf, -bl.s_zf);
        assert!((r.chi_if.norm() - bl.chi_if.norm()).abs() < 1e-12 * r.chi_if.norm());
        assert!((r.s_ii - bl.s_ii).abs() < 1e-14);
        assert!((r.s_ff - bl.s_ff).abs() < 1e-12 * r.s_ff);
    }

    #[test]
    fn image_branch_is_small_in_good_cavity() {
        let p = sys();
        let b = BathSpec::thermal(0.7, 0.2, 0.0, 3.0);
        let t = tone(&p, 0.3, Sideband::Red);
        let w = p.omega_m();
        let a = detector_correlators(&p, &b, &t, Sideband::Red, w, &LrOptions::default()).unwrap();
        let c = detector_correlators(
            &p,
            &b,
            &t,
            Sideband::Red,
            w,
            &LrOptions { image_branch: true },
        )
        .unwrap();
        let r = p.kappa() / p.omega_m();
        assert!((a.s_zf - c.s_zf).norm() < r * a.s_zf.norm(), "{a:?} {c:?}");
        assert!((a.s_ff - c.s_ff).abs() < r * r * a.s_ff);
    }

    #[test]
    fn red_vacuum_cancels_zero_temperature_mechanics() {
        let p = sys();
        let b = BathSpec::vacuum();
        let grid = linspace(-100.0, 100.0, 41);
        let s = sxx_effective(
            &p,
            &b,
            &tone(&p, 0.01, Sideband::Red),
            Sideband::Red,
            &grid,
            &LrOptions::default(),
        )
        .unwrap();
        assert!(s.values().iter().all(|v| v.abs() < 1e-18));
        let s = sxx_effective(
            &p,
            &b,
            &tone(&p, 0.01, Sideband::Blue),
            Sideband::Blue,
            &grid,
            &LrOptions::default(),
        )
        .unwrap();
        let bare = -chi_xx(p.omega_m(), p.mass(), p.omega_m(), p.gamma_m()).im;
        assert!((s.values()[20] / bare - 2.0).abs() < 1e-12);
    }

    #[test]
    fn matches_scattering_at_weak_coupling() {
        let p = sys();
        let weak = EvalOptions {
            weak_coupling: true,
            ..EvalOptions::default()
        };
        let grid = linspace(-5.0 * p.gamma_m(), 5.0 * p.gamma_m(), 101);
        for b in [
            BathSpec::vacuum(),
            BathSpec::thermal(0.7, 0.2, 0.0, 3.0),
            BathSpec::thermal(0.0, 0.0, 0.0, 12.0),
        ] {
            for sb in [Sideband::Red, Sideband::Blue] {
                let t = tone(&p, 1e-4, sb);
                let lr = output_spectrum_lr(&p, &b, &t, sb, &grid, &LrOptions::default()).unwrap();
                let sc =
                    single_tone_spectrum(&p, &b, &t, sb, SpectrumKind::Symmetrized, &grid, &weak)
                        .unwrap();
                let floor = crate::scattering::noise_floor(&p, &b);
                assert!((lr.values()[0] - sc.values()[0]).abs() < 1e-3 * floor);
                let wl = lr.integrate() - floor * (grid[100] - grid[0]) / TWO_PI;
                let ws = sc.integrate() - floor * (grid[100] - grid[0]) / TWO_PI;
                assert!(
                    (wl - ws).abs() <= 1e-3 * ws.abs().max(1e-3 * p.gamma_m() * 1e-4),
                    "{sb:?} {wl} {ws}"
                );
            }
        }
    }

    #[test]
    fn squashing_dip_for_hot_cavity() {
        let p = sys();
        let b = BathSpec::thermal(0.0, 4.0, 0.0, 0.5);
        let t = tone(&p, 1e-3, Sideband::Red);
        let s =
            output_spectrum_lr(&p, &b, &t, Sideband::Red, &[0.0], &LrOptions::default()).unwrap();
        let det = at_resonance(&p, &b, Sideband::Red);
        assert!(s.values()[0] < det.s_ii);
    }

    #[test]
    fn constraint_examples() {
        let c = heisenberg_gap(1.0, 1.0, Complex64::new(0.0, 0.5)).unwrap();
        assert!(c.rhs.abs() < 1e-15);
        let c = heisenberg_gap(1.0, 1.0, Complex64::new(0.0, -0.5)).unwrap();
        assert!(c.rhs.abs() < 1e-15);
        let c = heisenberg_gap(1.0, 1.0, Complex64::new(0.7, 0.0)).unwrap();
        assert!((c.rhs - 0.25).abs() < 1e-15);
        let c = heisenberg_gap(0.5, 0.5, Complex64::new(0.0, 0.0)).unwrap();
        assert_eq!(c.gap(), 0.0);
        assert!(c.satisfied);
        assert!(heisenberg_gap(-1.0, 1.0, Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn vacuum_resonance_reaches_zero_added_noise() {
        let p = sys();
        for sb in [Sideband::Red, Sideband::Blue] {
            let d = at_resonance(&p, &BathSpec::vacuum(), sb);
            let c = heisenberg_gap(d.s_zz(), d.s_ff, d.s_zf).unwrap();
            assert!(c.rhs < 1e-12);
            assert!(c.satisfied);
        }
    }

    #[test]
    fn intrinsic_loss_is_rejected() {
        let p = SystemParams::new(TWO_PI * 5e9, TWO_PI * 4e6, 1.0, 1e5, 1e5, 1e5, 10.0).unwrap();
        let t = tone(&p, 0.1, Sideband::Red);
        assert!(detector_correlators(
            &p,
            &BathSpec::vacuum(),
            &t,
            Sideband::Red,
            p.omega_m(),
            &LrOptions::default()
        )
        .is_err());
    }
}
