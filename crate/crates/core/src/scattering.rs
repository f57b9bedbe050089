//! Single-tone scattering formulation: the 3×3 input/output matrix for a drive
//! on one mechanical sideband, the resulting output spectra, their imbalance
//! and the output-field commutator.
//!
//! The printed matrix only has the two external ports. The intrinsic loss
//! port enters exactly like the left port (same structure with κ_L → κ_I); it
//! is carried as an extra column so that κ_I > 0 is handled consistently.

use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;
// Inherent float methods exist only when std is linked somewhere in the graph.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::model::{BathSpec, Sideband, Spectrum, SpectrumKind, SystemParams, ToneSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Knobs shared by the single-tone evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    /// Reject frequencies with |ω ∓ ω_m| ≥ κ/4. Turning this off is explicit,
    /// never silent.
    pub enforce_window: bool,
    /// Use γ_tot ≈ γ_m in the Lorentzian denominators (weak-coupling form)
    /// instead of the full γ_m ± γ_opt.
    pub weak_coupling: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            enforce_window: true,
            weak_coupling: false,
        }
    }
}

/// Intracavity amplitude ā_n = √κ_L α_n / (κ/2 − i(ω_n − ω_c)) of a tone
/// injected through the left port with drive amplitude α_n.
pub fn intracavity_amplitude(p: &SystemParams, detuning: f64, alpha_n: Complex64) -> Complex64 {
    alpha_n * p.kappa_l().sqrt() / Complex64::new(0.5 * p.kappa(), -detuning)
}

/// Inverse map: the real drive amplitude |α_n| giving |ā_n|² = n_p.
pub fn drive_amplitude_for_photons(p: &SystemParams, detuning: f64, n_p: f64) -> f64 {
    n_p.sqrt() * Complex64::new(0.5 * p.kappa(), -detuning).norm() / p.kappa_l().sqrt()
}

/// N^±[ω] = −i(ω ∓ ω_m) + (γ_m ± γ_opt)/2.
pub fn mech_denominator(
    omega: f64,
    sideband: Sideband,
    omega_m: f64,
    gamma_m: f64,
    gamma_opt: f64,
) -> Complex64 {
    let s = sideband.sign();
    Complex64::new(0.5 * (gamma_m + s * gamma_opt), -(omega - s * omega_m))
}

/// Scattering matrix at one drive-frame frequency ω. Rows/columns are
/// ordered (d_R, d_L, c^(†)); `intrinsic` is the column for the d_I input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringMatrix {
    pub entries: [[Complex64; 3]; 3],
    pub intrinsic: [Complex64; 3],
    pub sideband: Sideband,
    pub omega: f64,
}

/// First row of the matrix: how each input reaches the right-port output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputRow {
    pub s11: Complex64,
    pub s12: Complex64,
    pub s13: Complex64,
    pub s1i: Complex64,
}

impl ScatteringMatrix {
    pub fn first_row(&self) -> OutputRow {
        let r = self.entries[0];
        OutputRow {
            s11: r[0],
            s12: r[1],
            s13: r[2],
            s1i: self.intrinsic[0],
        }
    }
}

impl OutputRow {
    /// |s₁₁|² + |s₁₂|² + |s₁I|² ± |s₁₃|²; equals 1 when the matrix preserves
    /// the output commutator.
    pub fn graded_norm(&self, sideband: Sideband) -> f64 {
        self.s11.norm_sqr()
            + self.s12.norm_sqr()
            + self.s1i.norm_sqr()
            + sideband.sign() * self.s13.norm_sqr()
    }
}

fn check_window(
    p: &SystemParams,
    sideband: Sideband,
    omega: f64,
    opts: &EvalOptions,
) -> Result<()> {
    p.require_good_cavity()?;
    let u = omega - sideband.sign() * p.omega_m();
    if opts.enforce_window && u.abs() >= 0.25 * p.kappa() {
        return Err(Error::Validity(format!(
            "|omega -/+ omega_m| = {} rad/s is not below kappa/4 = {} rad/s",
            u.abs(),
            0.25 * p.kappa()
        )));
    }
    Ok(())
}

pub fn scattering_matrix(
    p: &SystemParams,
    tone: &ToneSpec,
    sideband: Sideband,
    omega: f64,
    opts: &EvalOptions,
) -> Result<ScatteringMatrix> {
    check_window(p, sideband, omega, opts)?;
    let s = sideband.sign();
    let k = p.kappa();
    let gamma_opt = tone.gamma_opt(p);
    let n = mech_denominator(omega, sideband, p.omega_m(), p.gamma_m(), gamma_opt);
    let mech = gamma_opt / n;
    let rates = [p.kappa_r(), p.kappa_l(), p.kappa_i()];

    // Electromagnetic block: −2√(κ_iκ_j)/κ ± √(κ_iκ_j)/κ·γ_opt/N (+1 on the diagonal).
    let em = |a: usize, b: usize| -> Complex64 {
        let r = (rates[a] * rates[b]).sqrt() / k;
        let diag = if a == b { 1.0 } else { 0.0 };
        Complex64::new(diag - 2.0 * r, 0.0) + s * r * mech
    };
    let to_mech = |a: usize| (rates[a] / k).sqrt() * I * (p.gamma_m() * gamma_opt).sqrt() / n;

    let entries = [
        [em(0, 0), em(0, 1), to_mech(0)],
        [em(1, 0), em(1, 1), to_mech(1)],
        [
            to_mech(0),
            to_mech(1),
            Complex64::new(1.0, 0.0) - p.gamma_m() / n,
        ],
    ];
    let intrinsic = [em(0, 2), em(1, 2), to_mech(2)];
    Ok(ScatteringMatrix {
        entries,
        intrinsic,
        sideband,
        omega,
    })
}

/// Output spectrum at one frequency, composed from the first matrix row and
/// the input-noise correlators.
pub fn spectrum_from_scattering(
    row: &OutputRow,
    baths: &BathSpec,
    kind: SpectrumKind,
    sideband: Sideband,
) -> f64 {
    let (a11, a12, a13, a1i) = (
        row.s11.norm_sqr(),
        row.s12.norm_sqr(),
        row.s13.norm_sqr(),
        row.s1i.norm_sqr(),
    );
    match kind {
        SpectrumKind::Symmetrized => {
            a11 * (baths.n_r + 0.5 * baths.alpha_r)
                + a12 * (baths.n_l + 0.5 * baths.alpha_l)
                + a1i * (baths.n_i + 0.5 * baths.alpha_i)
                + a13 * (baths.n_m + 0.5 * baths.beta)
        }
        SpectrumKind::NormalOrdered => {
            let upconverted_vacuum = match sideband {
                Sideband::Red => 0.0,
                Sideband::Blue => baths.beta,
            };
            a11 * baths.n_r
                + a12 * baths.n_l
                + a1i * baths.n_i
                + a13 * (baths.n_m + upconverted_vacuum)
        }
    }
}

/// Σ_{σ=L,I} (κ_σ/κ)(α_σ − α_R)/2: how far the other ports' vacuum weights
/// stray from the right port's.
fn vacuum_mismatch(p: &SystemParams, b: &BathSpec) -> f64 {
    let k = p.kappa();
    0.5 * (p.kappa_l() / k * (b.alpha_l - b.alpha_r) + p.kappa_i() / k * (b.alpha_i - b.alpha_r))
}

/// Symmetrized off-resonant noise floor S̄₀.
///
/// Reduces to α_R/2 + n_R + (4κ_R/κ)(n_c − n_R) whenever the vacuum weights
/// agree. With unequal weights, the α mismatch of each port enters with its
/// own κ_σ/κ, as the matrix composition demands.
pub fn noise_floor(p: &SystemParams, baths: &BathSpec) -> f64 {
    0.5 * baths.alpha_r
        + noise_floor_normal(p, baths)
        + 4.0 * p.kappa_r() / p.kappa() * vacuum_mismatch(p, baths)
}

/// Normal-ordered floor n_R + (4κ_R/κ)(n_c − n_R).
pub fn noise_floor_normal(p: &SystemParams, baths: &BathSpec) -> f64 {
    baths.n_r + 4.0 * p.kappa_r() / p.kappa() * (baths.n_c(p) - baths.n_r)
}

fn gamma_tot(p: &SystemParams, sideband: Sideband, gamma_opt: f64, opts: &EvalOptions) -> f64 {
    if opts.weak_coupling {
        p.gamma_m()
    } else {
        p.gamma_m() + sideband.sign() * gamma_opt
    }
}

fn require_stable(p: &SystemParams, sideband: Sideband, gamma_opt: f64) -> Result<()> {
    let g = p.gamma_m() + sideband.sign() * gamma_opt;
    if g > 0.0 {
        Ok(())
    } else {
        Err(Error::Instability { gamma_tot: g })
    }
}

/// Bracket multiplying the single-tone Lorentzian.
pub fn lorentzian_bracket(
    p: &SystemParams,
    baths: &BathSpec,
    gamma_opt: f64,
    sideband: Sideband,
    kind: SpectrumKind,
) -> f64 {
    let c = gamma_opt / p.gamma_m();
    let n_eff = baths.n_eff(p);
    let drag = c * (baths.n_c(p) - baths.n_r);
    let d = vacuum_mismatch(p, baths);
    match (kind, sideband) {
        (SpectrumKind::Symmetrized, Sideband::Red) => {
            baths.n_m - n_eff + 0.5 * (baths.beta - baths.alpha_r) - drag - (2.0 + c) * d
        }
        (SpectrumKind::Symmetrized, Sideband::Blue) => {
            baths.n_m + n_eff + 0.5 * (baths.beta + baths.alpha_r) - drag + (2.0 - c) * d
        }
        (SpectrumKind::NormalOrdered, Sideband::Red) => baths.n_m - n_eff - drag,
        (SpectrumKind::NormalOrdered, Sideband::Blue) => baths.n_m + n_eff + baths.beta - drag,
    }
}

/// Closed-form single-tone spectrum at offset `u = ω ∓ ω_m` from the
/// mechanical resonance (equivalently, from the cavity resonance).
pub fn single_tone_value(
    p: &SystemParams,
    baths: &BathSpec,
    gamma_opt: f64,
    sideband: Sideband,
    kind: SpectrumKind,
    u: f64,
    opts: &EvalOptions,
) -> f64 {
    let floor = match kind {
        SpectrumKind::Symmetrized => noise_floor(p, baths),
        SpectrumKind::NormalOrdered => noise_floor_normal(p, baths),
    };
    let g = gamma_tot(p, sideband, gamma_opt, opts);
    let lor = p.kappa_r() / p.kappa() * p.gamma_m() * gamma_opt / (u * u + 0.25 * g * g);
    floor + lor * lorentzian_bracket(p, baths, gamma_opt, sideband, kind)
}

/// Single-tone output spectrum on a grid of offsets from the cavity resonance.
pub fn single_tone_spectrum(
    p: &SystemParams,
    baths: &BathSpec,
    tone: &ToneSpec,
    sideband: Sideband,
    kind: SpectrumKind,
    grid: &[f64],
    opts: &EvalOptions,
) -> Result<Spectrum> {
    baths.validate()?;
    let gamma_opt = tone.gamma_opt(p);
    require_stable(p, sideband, gamma_opt)?;
    let s = sideband.sign();
    let values = grid
        .iter()
        .map(|&nu| {
            check_window(p, sideband, nu + s * p.omega_m(), opts)?;
            Ok(single_tone_value(
                p, baths, gamma_opt, sideband, kind, nu, opts,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(grid.to_vec(), values)
}

/// Same spectrum, built entry by entry from the scattering matrix.
pub fn single_tone_spectrum_composed(
    p: &SystemParams,
    baths: &BathSpec,
    tone: &ToneSpec,
    sideband: Sideband,
    kind: SpectrumKind,
    grid: &[f64],
    opts: &EvalOptions,
) -> Result<Spectrum> {
    baths.validate()?;
    require_stable(p, sideband, tone.gamma_opt(p))?;
    let s = sideband.sign();
    let values = grid
        .iter()
        .map(|&nu| {
            let m = scattering_matrix(p, tone, sideband, nu + s * p.omega_m(), opts)?;
            Ok(spectrum_from_scattering(
                &m.first_row(),
                baths,
                kind,
                sideband,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Spectrum::new(grid.to_vec(), values)
}

/// Imbalance δS = S|blue − S|red, both re-centred on their Lorentzian peaks:
/// the grid holds offsets u = ω ∓ ω_m.
pub fn imbalance(
    p: &SystemParams,
    baths: &BathSpec,
    tone: &ToneSpec,
    kind: SpectrumKind,
    grid: &[f64],
    opts: &EvalOptions,
) -> Result<Spectrum> {
    let blue = single_tone_spectrum(p, baths, tone, Sideband::Blue, kind, grid, opts)?;
    let red = single_tone_spectrum(p, baths, tone, Sideband::Red, kind, grid, opts)?;
    let values = blue
        .values()
        .iter()
        .zip(red.values())
        .map(|(b, r)| b - r)
        .collect();
    Spectrum::new(grid.to_vec(), values)
}

/// Exact integrated weight ∫dω/2π of the single-tone Lorentzian:
/// (κ_R/κ)·γ_mγ_opt/γ_tot·bracket.
pub fn lorentzian_weight(
    p: &SystemParams,
    baths: &BathSpec,
    tone: &ToneSpec,
    sideband: Sideband,
    kind: SpectrumKind,
) -> Result<f64> {
    let gamma_opt = tone.gamma_opt(p);
    require_stable(p, sideband, gamma_opt)?;
    let g = p.gamma_m() + sideband.sign() * gamma_opt;
    Ok(p.kappa_r() / p.kappa() * p.gamma_m() * gamma_opt / g
        * lorentzian_bracket(p, baths, gamma_opt, sideband, kind))
}

/// Integrated imbalance δI to leading order in γ_opt/γ_m.
///
/// Symmetrized: (κ_R/κ)γ_opt[2n_eff + α_R + 2Σ_{σ=L,I}(κ_σ/κ)(α_σ − α_R)],
/// which is (κ_R/κ)γ_opt[2n_eff + α] for equal vacuum weights.
/// Normal-ordered: (κ_R/κ)γ_opt[2n_eff + β].
pub fn integrated_asymmetry(
    p: &SystemParams,
    baths: &BathSpec,
    tone: &ToneSpec,
    kind: SpectrumKind,
) -> f64 {
    let gamma_opt = tone.gamma_opt(p);
    if gamma_opt > 0.1 * p.gamma_m() {
        log::warn!(
            "integrated asymmetry is a weak-coupling result; gamma_opt/gamma_m = {:.3}",
            gamma_opt / p.gamma_m()
        );
    }
    let two_n_eff = 2.0 * baths.n_eff(p);
    let vacuum = match kind {
        SpectrumKind::Symmetrized => baths.alpha_r + 4.0 * vacuum_mismatch(p, baths),
        SpectrumKind::NormalOrdered => baths.beta,
    };
    p.kappa_r() / p.kappa() * gamma_opt * (two_n_eff + vacuum)
}

/// Coefficient of δ(ω + Ω) in [d_R,out[ω], d_R,out†[Ω]], closed form.
pub fn output_commutator(
    p: &SystemParams,
    baths: &BathSpec,
    tone: &ToneSpec,
    sideband: Sideband,
    omega: f64,
    opts: &EvalOptions,
) -> Result<f64> {
    check_window(p, sideband, omega, opts)?;
    let s = sideband.sign();
    let k = p.kappa();
    let (xr, xl, xi) = (p.kappa_r() / k, p.kappa_l() / k, p.kappa_i() / k);
    let gamma_opt = tone.gamma_opt(p);
    let c = gamma_opt / p.gamma_m();
    let u = omega - s * p.omega_m();
    let g = gamma_tot(p, sideband, gamma_opt, opts);
    let lor = xr * p.gamma_m() * gamma_opt / (u * u + 0.25 * g * g);
    let mismatch = xl * (baths.alpha_r - baths.alpha_l) + xi * (baths.alpha_r - baths.alpha_i);
    let constant = baths.alpha_r - 4.0 * xr * mismatch;
    let residue = (baths.beta - xr * baths.alpha_r - xl * baths.alpha_l - xi * baths.alpha_i)
        + (1.0 + s * c) * mismatch;
    Ok(constant + s * lor * residue)
}

/// The same commutator, composed from the matrix row.
pub fn output_commutator_composed(
    p: &SystemParams,
    baths: &BathSpec,
    tone: &ToneSpec,
    sideband: Sideband,
    omega: f64,
    opts: &EvalOptions,
) -> Result<f64> {
    let r = scattering_matrix(p, tone, sideband, omega, opts)?.first_row();
    Ok(r.s11.norm_sqr() * baths.alpha_r
        + r.s12.norm_sqr() * baths.alpha_l
        + r.s1i.norm_sqr() * baths.alpha_i
        + sideband.sign() * r.s13.norm_sqr() * baths.beta)
}
