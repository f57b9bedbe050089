//! Domain types shared by every formulation: device constants, baths, drive
//! tones and sampled spectra.

use alloc::format;
use alloc::vec::Vec;
// Inherent float methods exist only when std is linked somewhere in the graph.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and > 0, got {v}"),
        ))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and >= 0, got {v}"),
        ))
    }
}

/// Static device constants. All rates in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    omega_c: f64,
    omega_m: f64,
    g0: f64,
    kappa_l: f64,
    kappa_r: f64,
    kappa_i: f64,
    gamma_m: f64,
    x_zp: Option<f64>,
}

impl SystemParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        omega_c: f64,
        omega_m: f64,
        g0: f64,
        kappa_l: f64,
        kappa_r: f64,
        kappa_i: f64,
        gamma_m: f64,
    ) -> Result<Self> {
        positive("omega_c", omega_c)?;
        positive("omega_m", omega_m)?;
        positive("g0", g0)?;
        positive("kappa_l", kappa_l)?;
        positive("kappa_r", kappa_r)?;
        non_negative("kappa_i", kappa_i)?;
        positive("gamma_m", gamma_m)?;
        Ok(Self {
            omega_c,
            omega_m,
            g0,
            kappa_l,
            kappa_r,
            kappa_i,
            gamma_m,
            x_zp: None,
        })
    }

    /// Attach a zero-point amplitude in metres. Without one, position spectra
    /// are reported in units of `x_zp²`.
    pub fn with_x_zp(mut self, x_zp: f64) -> Result<Self> {
        positive("x_zp", x_zp)?;
        self.x_zp = Some(x_zp);
        Ok(self)
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }
    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }
    pub fn g0(&self) -> f64 {
        self.g0
    }
    pub fn kappa_l(&self) -> f64 {
        self.kappa_l
    }
    pub fn kappa_r(&self) -> f64 {
        self.kappa_r
    }
    pub fn kappa_i(&self) -> f64 {
        self.kappa_i
    }
    pub fn gamma_m(&self) -> f64 {
        self.gamma_m
    }
    pub fn x_zp(&self) -> Option<f64> {
        self.x_zp
    }

    /// Total cavity linewidth κ = κ_L + κ_R + κ_I.
    pub fn kappa(&self) -> f64 {
        self.kappa_l + self.kappa_r + self.kappa_i
    }

    /// Zero-point amplitude used for position units (1 when not given).
    pub fn x_zp_or_unit(&self) -> f64 {
        self.x_zp.unwrap_or(1.0)
    }

    /// Effective mass m = ħ/(2 ω_m x_zp²).
    pub fn mass(&self) -> f64 {
        let x = self.x_zp_or_unit();
        1.0 / (2.0 * self.omega_m * x * x)
    }

    /// Good-cavity gate required by every rotating-wave calculation.
    pub fn require_good_cavity(&self) -> Result<()> {
        if self.omega_m > self.kappa() {
            Ok(())
        } else {
            Err(Error::Validity(format!(
                "good-cavity gate: omega_m = {} rad/s must exceed kappa = {} rad/s",
                self.omega_m,
                self.kappa()
            )))
        }
    }
}

/// Thermal occupations and vacuum-noise weights of every input channel.
///
/// The vacuum weights are 1 physically; they are kept as free parameters so
/// the bookkeeping of each contribution can be traced through the formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub n_r: f64,
    pub n_l: f64,
    pub n_i: f64,
    pub n_m: f64,
    pub alpha_r: f64,
    pub alpha_l: f64,
    pub alpha_i: f64,
    pub beta: f64,
}

impl BathSpec {
    pub fn vacuum() -> Self {
        Self::thermal(0.0, 0.0, 0.0, 0.0)
    }

    /// Physical vacuum weights with the given occupations.
    pub fn thermal(n_r: f64, n_l: f64, n_i: f64, n_m: f64) -> Self {
        Self {
            n_r,
            n_l,
            n_i,
            n_m,
            alpha_r: 1.0,
            alpha_l: 1.0,
            alpha_i: 1.0,
            beta: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        non_negative("n_r", self.n_r)?;
        non_negative("n_l", self.n_l)?;
        non_negative("n_i", self.n_i)?;
        non_negative("n_m", self.n_m)?;
        non_negative("alpha_r", self.alpha_r)?;
        non_negative("alpha_l", self.alpha_l)?;
        non_negative("alpha_i", self.alpha_i)?;
        non_negative("beta", self.beta)
    }

    /// Cavity occupation n_c: the κ-weighted mean of the port occupations.
    pub fn n_c(&self, p: &SystemParams) -> f64 {
        (p.kappa_l * self.n_l + p.kappa_r * self.n_r + p.kappa_i * self.n_i) / p.kappa()
    }

    /// n_eff = 2 n_c − n_R, the cavity-noise combination seen by the imbalance.
    pub fn n_eff(&self, p: &SystemParams) -> f64 {
        2.0 * self.n_c(p) - self.n_r
    }

    /// True when every vacuum weight equals 1 (to 1e-12).
    pub fn is_physical_vacuum(&self) -> bool {
        [self.alpha_r, self.alpha_l, self.alpha_i, self.beta]
            .iter()
            .all(|w| (w - 1.0).abs() < 1e-12)
    }

    pub(crate) fn require_physical_vacuum(&self) -> Result<()> {
        if self.is_physical_vacuum() {
            Ok(())
        } else {
            Err(Error::invalid(
                "baths",
                "this formulation assumes alpha_R = alpha_L = alpha_I = beta = 1",
            ))
        }
    }
}

/// Which mechanical sideband a drive addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sideband {
    /// Drive below the cavity, Δ = ω_c − ω_p = +ω_m: beam-splitter coupling.
    Red,
    /// Drive above the cavity, Δ = −ω_m: two-mode-squeezing coupling.
    Blue,
}

impl Sideband {
    /// +1 for red, −1 for blue; the ± of the scattering formulas.
    pub fn sign(self) -> f64 {
        match self {
            Sideband::Red => 1.0,
            Sideband::Blue => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ToneRole {
    RedProbe,
    BlueProbe,
    Cooling,
    Generic,
}

/// One drive tone. The coupling G is stored; n_p is derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneSpec {
    detuning: f64,
    g: f64,
    role: ToneRole,
}

impl ToneSpec {
    /// Tone with a given linearized coupling G (rad/s).
    pub fn from_coupling(detuning: f64, g: f64, role: ToneRole) -> Result<Self> {
        if !detuning.is_finite() {
            return Err(Error::invalid("detuning", "must be finite"));
        }
        non_negative("G", g)?;
        Ok(Self { detuning, g, role })
    }

    /// Tone with a given mean intracavity photon number; G = g0·√n_p.
    pub fn from_photons(p: &SystemParams, detuning: f64, n_p: f64, role: ToneRole) -> Result<Self> {
        non_negative("n_p", n_p)?;
        Self::from_coupling(detuning, p.g0 * n_p.sqrt(), role)
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn role(&self) -> ToneRole {
        self.role
    }

    pub fn n_p(&self, p: &SystemParams) -> f64 {
        let r = self.g / p.g0;
        r * r
    }

    /// Optical (anti-)damping rate γ_opt = 4G²/κ.
    pub fn gamma_opt(&self, p: &SystemParams) -> f64 {
        4.0 * self.g * self.g / p.kappa()
    }

    /// Sideband addressed by the tone: from its role, or from the sign of the
    /// detuning for generic tones.
    pub fn sideband(&self) -> Sideband {
        match self.role {
            ToneRole::RedProbe | ToneRole::Cooling => Sideband::Red,
            ToneRole::BlueProbe => Sideband::Blue,
            ToneRole::Generic => {
                if self.detuning > 0.0 {
                    Sideband::Blue
                } else {
                    Sideband::Red
                }
            }
        }
    }
}

/// An ordered set of drive tones plus the probe/cooling detunings δ and δ_c.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneConfig {
    tones: Vec<ToneSpec>,
    delta: f64,
    delta_c: f64,
    allow_close_sidebands: bool,
}

impl ToneConfig {
    /// Builds and validates a configuration. For the three-tone scheme
    /// (red probe, blue probe and cooling all present) this enforces
    /// δ_c > δ and δ > 10 γ_m unless `allow_close_sidebands` is set.
    pub fn new(
        p: &SystemParams,
        tones: Vec<ToneSpec>,
        delta: f64,
        delta_c: f64,
        allow_close_sidebands: bool,
    ) -> Result<Self> {
        non_negative("delta", delta)?;
        non_negative("delta_c", delta_c)?;
        let cfg = Self {
            tones,
            delta,
            delta_c,
            allow_close_sidebands,
        };
        for role in [ToneRole::RedProbe, ToneRole::BlueProbe, ToneRole::Cooling] {
            if cfg.tones.iter().filter(|t| t.role == role).count() > 1 {
                return Err(Error::invalid(
                    "tones",
                    format!("more than one {role:?} tone"),
                ));
            }
        }
        let three_tone =
            cfg.red_probe().is_some() && cfg.blue_probe().is_some() && cfg.cooling().is_some();
        if three_tone && !allow_close_sidebands {
            if delta_c <= delta {
                return Err(Error::Validity(format!(
                    "cooling detuning delta_c = {delta_c} must exceed probe detuning delta = {delta}"
                )));
            }
            if delta <= 10.0 * p.gamma_m() {
                return Err(Error::Validity(format!(
                    "probe detuning delta = {delta} must exceed 10 gamma_m = {}",
                    10.0 * p.gamma_m()
                )));
            }
        }
        Ok(cfg)
    }

    pub fn tones(&self) -> &[ToneSpec] {
        &self.tones
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn delta_c(&self) -> f64 {
        self.delta_c
    }
    pub fn allow_close_sidebands(&self) -> bool {
        self.allow_close_sidebands
    }

    fn find(&self, role: ToneRole) -> Option<&ToneSpec> {
        self.tones.iter().find(|t| t.role == role)
    }
    pub fn red_probe(&self) -> Option<&ToneSpec> {
        self.find(ToneRole::RedProbe)
    }
    pub fn blue_probe(&self) -> Option<&ToneSpec> {
        self.find(ToneRole::BlueProbe)
    }
    pub fn cooling(&self) -> Option<&ToneSpec> {
        self.find(ToneRole::Cooling)
    }

    /// γ_opt⁺ of the red probe (0 when absent).
    pub fn gamma_plus(&self, p: &SystemParams) -> f64 {
        self.red_probe().map_or(0.0, |t| t.gamma_opt(p))
    }
    /// γ_opt⁻ of the blue probe (0 when absent).
    pub fn gamma_minus(&self, p: &SystemParams) -> f64 {
        self.blue_probe().map_or(0.0, |t| t.gamma_opt(p))
    }
    /// γ_opt of the cooling tone (0 when absent).
    pub fn gamma_cool(&self, p: &SystemParams) -> f64 {
        self.cooling().map_or(0.0, |t| t.gamma_opt(p))
    }
}

/// Enhanced mechanical damping and occupation produced by the cooling tone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveMechanics {
    pub gamma_m_eff: f64,
    pub n_m_eff: f64,
}

/// γ_M = γ_m + γ_opt^cool and n_M = (γ_m n_m + γ_opt^cool n_c)/γ_M.
pub fn derive_effective_mechanics(
    p: &SystemParams,
    baths: &BathSpec,
    cooling: &ToneSpec,
) -> Result<EffectiveMechanics> {
    if cooling.role != ToneRole::Cooling {
        return Err(Error::invalid("cooling", "tone role must be Cooling"));
    }
    Ok(effective_mechanics_from_rate(
        p,
        baths,
        cooling.gamma_opt(p),
    ))
}

pub(crate) fn effective_mechanics_from_rate(
    p: &SystemParams,
    baths: &BathSpec,
    gamma_cool: f64,
) -> EffectiveMechanics {
    let gamma_m_eff = p.gamma_m + gamma_cool;
    let n_m_eff = (p.gamma_m * baths.n_m + gamma_cool * baths.n_c(p)) / gamma_m_eff;
    EffectiveMechanics {
        gamma_m_eff,
        n_m_eff,
    }
}

/// Total mechanical damping γ_tot = γ_m + Σ_red γ_opt − Σ_blue γ_opt must be
/// positive. Returns γ_tot on success.
pub fn validate_stability(p: &SystemParams, tones: &[ToneSpec]) -> Result<f64> {
    let gamma_tot = tones.iter().fold(p.gamma_m, |acc, t| {
        acc + t.sideband().sign() * t.gamma_opt(p)
    });
    if gamma_tot > 0.0 {
        Ok(gamma_tot)
    } else {
        Err(Error::Instability { gamma_tot })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectrumKind {
    Symmetrized,
    NormalOrdered,
}

/// Real spectral density sampled on a strictly increasing frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    freq_offsets: Vec<f64>,
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(freq_offsets: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if freq_offsets.len() != values.len() {
            return Err(Error::invalid(
                "spectrum",
                format!(
                    "grid has {} points but {} values",
                    freq_offsets.len(),
                    values.len()
                ),
            ));
        }
        if freq_offsets
            .iter()
            .chain(values.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid("spectrum", "non-finite grid point or value"));
        }
        if freq_offsets.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                "spectrum",
                "grid must be strictly increasing",
            ));
        }
        Ok(Self {
            freq_offsets,
            values,
        })
    }

    pub fn freq_offsets(&self) -> &[f64] {
        &self.freq_offsets
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Trapezoid estimate of ∫ dω/2π S(ω) over the grid.
    pub fn integrate(&self) -> f64 {
        trapezoid(&self.freq_offsets, &self.values) / crate::TWO_PI
    }

    /// Grid point with the largest value.
    pub fn argmax(&self) -> Option<(f64, f64)> {
        self.freq_offsets.iter().zip(&self.values).fold(
            None,
            |best: Option<(f64, f64)>, (&x, &y)| match best {
                Some((_, by)) if by >= y => best,
                _ => Some((x, y)),
            },
        )
    }
}

pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            (0..n).map(|i| a + h * i as f64).collect()
        }
    }
}
