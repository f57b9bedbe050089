//! Euler–Maruyama integration of the linearized rotating-wave Langevin
//! equations.
//!
//! Frames: the cavity fluctuation d rotates at ω_c, the mechanics c at ω_m.
//! A red tone with detuning Δ_p = ω_p − ω_c couples d and c with phase
//! ε = −Δ_p − ω_m, a blue tone couples d and c* with ε = Δ_p − ω_m:
//!
//! ḋ = −(κ/2)d − i Σ_red G e^{iεt} c − i Σ_blue G e^{−iεt} c* − √κ_R ξ_R − Σ_{L,I} √κ_σ ξ_σ
//! ċ = −(γ_m/2)c − i Σ_red G e^{−iεt} d − i Σ_blue G e^{−iεt} d* − √γ_m ξ_m
//!
//! and the detected field is d_out = ξ_R + √κ_R d. The output uses the mean
//! of d over the step; with the state at the start of the step instead, the
//! discrete cavity is not all-pass and the floor rises as ≈ 4ω²dt/κ.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sideband_core::{
    validate_stability, BathSpec, Error, Result, Sideband, SystemParams, ToneConfig,
};

use super::noise::{channel_variance, complex_normal, Channel};
use super::psd::Welch;

/// Recorded in every oracle report.
pub const RNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha), seed_from_u64(seed) with stream = trajectory index; ziggurat normals (rand_distr)";

/// Steps between exact recomputations of the tone phases.
const PHASE_RESET: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Seconds (1/rate units).
    pub dt: f64,
    /// Steps per trajectory, burn-in included.
    pub n_steps: usize,
    pub n_trajectories: usize,
    pub seed: u64,
    pub burn_in: usize,
    /// Welch segments per trajectory.
    pub psd_segments: usize,
}

impl SimConfig {
    /// Config whose recorded part is exactly `segments` segments of `segment_len`.
    pub fn from_segments(
        dt: f64,
        segment_len: usize,
        segments: usize,
        trajectories: usize,
        burn_in: usize,
        seed: u64,
    ) -> Self {
        Self {
            dt,
            n_steps: burn_in + segment_len * segments,
            n_trajectories: trajectories,
            seed,
            burn_in,
            psd_segments: segments,
        }
    }

    pub fn recorded_len(&self) -> usize {
        self.n_steps.saturating_sub(self.burn_in)
    }

    pub fn segment_len(&self) -> usize {
        self.recorded_len() / self.psd_segments.max(1)
    }

    pub fn total_segments(&self) -> usize {
        self.psd_segments * self.n_trajectories
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryOutput {
    pub output_field: Vec<Complex64>,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy)]
struct Coupling {
    g: f64,
    /// Phase rate of the rotator e^{iεt} (red) or e^{−iεt} (blue).
    rate: f64,
}

/// Pre-computed coefficients for one configuration.
#[derive(Debug, Clone)]
struct Model {
    dt: f64,
    half_kappa: f64,
    sqrt_kr: f64,
    half_gamma: f64,
    sqrt_gm: f64,
    sigma_r: f64,
    sigma_li: f64,
    sigma_m: f64,
    red: Vec<Coupling>,
    blue: Vec<Coupling>,
}

fn step_error(msg: String) -> Error {
    Error::StepSize(msg)
}

fn invalid_sim(reason: &str) -> Error {
    Error::InvalidParameter {
        name: "sim",
        reason: reason.into(),
    }
}

impl Model {
    fn new(p: &SystemParams, baths: &BathSpec, cfg: &ToneConfig, sim: &SimConfig) -> Result<Self> {
        let (model, gamma_tot) = Self::build(p, baths, cfg, sim.dt)?;
        let dt = sim.dt;
        if sim.n_steps as f64 * dt <= 50.0 / gamma_tot {
            return Err(step_error(format!(
                "trajectory length {:.4e} s must exceed 50/gamma_tot = {:.4e} s",
                sim.n_steps as f64 * dt,
                50.0 / gamma_tot
            )));
        }
        if sim.n_trajectories == 0 || sim.psd_segments == 0 || sim.burn_in >= sim.n_steps {
            return Err(invalid_sim(
                "need at least one trajectory, one segment and recorded steps",
            ));
        }
        if sim.recorded_len() % sim.psd_segments != 0 || sim.segment_len() < 2 {
            return Err(invalid_sim(
                "recorded length must split into equal segments of at least two samples",
            ));
        }
        Ok(model)
    }

    /// Coefficients and the step-size gates; returns γ_tot too.
    fn build(p: &SystemParams, baths: &BathSpec, cfg: &ToneConfig, dt: f64) -> Result<(Self, f64)> {
        baths.validate()?;
        let gamma_tot = validate_stability(p, cfg.tones())?;
        if dt.is_nan() || dt <= 0.0 {
            return Err(step_error(format!("dt = {dt} must be positive")));
        }
        if dt * p.kappa() >= 0.05 {
            return Err(step_error(format!(
                "kappa dt = {:.4} must be below 0.05",
                dt * p.kappa()
            )));
        }
        if dt * gamma_tot >= 1e-3 {
            return Err(step_error(format!(
                "gamma_tot dt = {:.3e} must be below 1e-3",
                dt * gamma_tot
            )));
        }
        let mut red = Vec::new();
        let mut blue = Vec::new();
        for t in cfg.tones() {
            match t.sideband() {
                Sideband::Red => red.push(Coupling {
                    g: t.g(),
                    rate: -t.detuning() - p.omega_m(),
                }),
                Sideband::Blue => blue.push(Coupling {
                    g: t.g(),
                    rate: -(t.detuning() - p.omega_m()),
                }),
            }
        }
        let li_var = p.kappa_l() * channel_variance(baths, Channel::L, dt)
            + p.kappa_i() * channel_variance(baths, Channel::I, dt);
        let model = Self {
            dt,
            half_kappa: 0.5 * p.kappa(),
            sqrt_kr: p.kappa_r().sqrt(),
            half_gamma: 0.5 * p.gamma_m(),
            sqrt_gm: p.gamma_m().sqrt(),
            sigma_r: (0.5 * channel_variance(baths, Channel::R, dt)).sqrt(),
            sigma_li: (0.5 * li_var).sqrt(),
            sigma_m: (0.5 * channel_variance(baths, Channel::Mechanical, dt)).sqrt(),
            red,
            blue,
        };
        Ok((model, gamma_tot))
    }

    /// Runs one trajectory; `sink(d_out, c)` sees every step after burn-in.
    fn run<F: FnMut(Complex64, Complex64)>(&self, sim: &SimConfig, traj: usize, sink: F) {
        let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
        rng.set_stream(traj as u64);
        let (sr, sli, sm) = (self.sigma_r, self.sigma_li, self.sigma_m);
        let noise = |_: usize| {
            [
                complex_normal(&mut rng, sr),
                complex_normal(&mut rng, sli),
                complex_normal(&mut rng, sm),
            ]
        };
        self.run_with(sim.n_steps, sim.burn_in, noise, sink);
    }

    /// The integrator proper; `noise(k)` returns (ξ_R, Σ√κ_σ ξ_σ over L and I, ξ_m) for step k.
    fn run_with<N, F>(&self, n_steps: usize, burn_in: usize, mut noise: N, mut sink: F)
    where
        N: FnMut(usize) -> [Complex64; 3],
        F: FnMut(Complex64, Complex64),
    {
        let dt = self.dt;
        let (mut d, mut c) = (Complex64::default(), Complex64::default());
        let red_step: Vec<Complex64> = self
            .red
            .iter()
            .map(|k| Complex64::cis(k.rate * dt))
            .collect();
        let blue_step: Vec<Complex64> = self
            .blue
            .iter()
            .map(|k| Complex64::cis(k.rate * dt))
            .collect();
        let mut red_rot = vec![Complex64::new(1.0, 0.0); self.red.len()];
        let mut blue_rot = vec![Complex64::new(1.0, 0.0); self.blue.len()];
        let i = Complex64::i();
        for k in 0..n_steps {
            if k % PHASE_RESET == 0 {
                let t = k as f64 * dt;
                for (r, cp) in red_rot.iter_mut().zip(&self.red) {
                    *r = Complex64::cis(cp.rate * t);
                }
                for (r, cp) in blue_rot.iter_mut().zip(&self.blue) {
                    *r = Complex64::cis(cp.rate * t);
                }
            }
            let mut a = Complex64::default();
            for (r, cp) in red_rot.iter().zip(&self.red) {
                a += cp.g * r;
            }
            let mut b = Complex64::default();
            for (r, cp) in blue_rot.iter().zip(&self.blue) {
                b += cp.g * r;
            }
            let [xi_r, xi_li, xi_m] = noise(k);
            let dd =
                -self.half_kappa * d - i * (a * c + b * c.conj()) - self.sqrt_kr * xi_r - xi_li;
            let dc = -self.half_gamma * c - i * (a.conj() * d + b * d.conj()) - self.sqrt_gm * xi_m;
            let d_next = d + dd * dt;
            if k >= burn_in {
                sink(xi_r + self.sqrt_kr * 0.5 * (d + d_next), c);
            }
            d = d_next;
            c += dc * dt;
            for (r, s) in red_rot.iter_mut().zip(&red_step) {
                *r *= s;
            }
            for (r, s) in blue_rot.iter_mut().zip(&blue_step) {
                *r *= s;
            }
        }
    }
}

/// Stores every trajectory's output field. Meant for short runs; long runs
/// go through [`simulate_psd`].
pub fn integrate_langevin(
    p: &SystemParams,
    baths: &BathSpec,
    cfg: &ToneConfig,
    sim: &SimConfig,
) -> Result<Vec<TrajectoryOutput>> {
    let model = Model::new(p, baths, cfg, sim)?;
    Ok(with_pool(|| {
        (0..sim.n_trajectories)
            .into_par_iter()
            .map(|traj| {
                let mut out = Vec::with_capacity(sim.recorded_len());
                model.run(sim, traj, |x, _| out.push(x));
                TrajectoryOutput {
                    output_field: out,
                    dt: sim.dt,
                }
            })
            .collect()
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePsd {
    pub spectrum: sideband_core::Spectrum,
    pub segments: usize,
    pub segment_len: usize,
}

/// Integrates and Welch-averages without storing the time series.
/// Trajectories run in parallel; the reduction is in trajectory order.
pub fn simulate_psd(
    p: &SystemParams,
    baths: &BathSpec,
    cfg: &ToneConfig,
    sim: &SimConfig,
) -> Result<OraclePsd> {
    let model = Model::new(p, baths, cfg, sim)?;
    let seg = sim.segment_len();
    let parts: Vec<Welch> = with_pool(|| {
        (0..sim.n_trajectories)
            .into_par_iter()
            .map(|traj| {
                let mut w = Welch::new(seg, sim.dt);
                model.run(sim, traj, |x, _| w.push(x));
                w
            })
            .collect()
    });
    let mut total = Welch::new(seg, sim.dt);
    for w in &parts {
        total.merge(w);
    }
    Ok(OraclePsd {
        spectrum: total.spectrum(),
        segments: total.segments(),
        segment_len: seg,
    })
}

/// Integrates one path driven by supplied standard complex normals
/// (⟨|z|²⟩ = 2 per entry, ordered R, L+I, mechanical), scaled to the bath
/// variances at this `dt`. Returns (d_out, c) at every step. Only the
/// step-size gates apply: no spectrum is estimated from the path.
pub fn integrate_with_unit_noise(
    p: &SystemParams,
    baths: &BathSpec,
    cfg: &ToneConfig,
    dt: f64,
    unit: &[[Complex64; 3]],
) -> Result<Vec<(Complex64, Complex64)>> {
    let (model, _) = Model::build(p, baths, cfg, dt)?;
    let s = [model.sigma_r, model.sigma_li, model.sigma_m];
    let mut out = Vec::with_capacity(unit.len());
    model.run_with(
        unit.len(),
        0,
        |k| [unit[k][0] * s[0], unit[k][1] * s[1], unit[k][2] * s[2]],
        |d, c| out.push((d, c)),
    );
    Ok(out)
}

/// Time-averaged ⟨|c|²⟩ after burn-in, over all trajectories.
pub fn mechanical_occupation(
    p: &SystemParams,
    baths: &BathSpec,
    cfg: &ToneConfig,
    sim: &SimConfig,
) -> Result<f64> {
    let model = Model::new(p, baths, cfg, sim)?;
    let sums: Vec<f64> = with_pool(|| {
        (0..sim.n_trajectories)
            .into_par_iter()
            .map(|traj| {
                let mut s = 0.0;
                model.run(sim, traj, |_, c| s += c.norm_sqr());
                s
            })
            .collect()
    });
    Ok(sums.iter().sum::<f64>() / (sim.recorded_len() * sim.n_trajectories) as f64)
}

/// Worker count: SIDEBAND_LAB_THREADS when set, otherwise rayon's default.
pub fn thread_count() -> usize {
    std::env::var("SIDEBAND_LAB_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
    {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
