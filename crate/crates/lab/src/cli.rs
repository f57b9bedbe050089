//! `sideband-lab` subcommands. Every command writes its artifacts and a
//! `manifest.json` into `--out`.
//!
//! Exit codes: 0 success, 1 runtime failure (IO, fits), 2 configuration
//! error (including invalid parameters), 3 a validity/stability gate
//! rejected the configuration. stderr names the failing gate verbatim.

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};
use sideband_core::linear_response::{detector_correlators, heisenberg_gap, LrOptions};
use sideband_core::model::linspace;
use sideband_core::multitone::{
    full_rwa_spectrum, multitone_rates, multitone_spectra, sideband_ratio_model,
};
use sideband_core::scattering::{integrated_asymmetry, single_tone_spectrum, EvalOptions};
use sideband_core::{Sideband, SpectrumKind, TWO_PI};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use crate::calibrate::{analyze, load_data_dir, write_data_dir, CalibrationReport};
use crate::config::{Config, ConfigError, Resolved};
use crate::io::{write_columns, write_json, write_spectrum, IoError, RunManifest};
use crate::oracle::{canonical_configs, compare, SimConfig, RNG_ALGORITHM};
use crate::synthetic::{generate, SyntheticSettings};

#[derive(Debug, Parser)]
#[command(
    name = "sideband-lab",
    version,
    about = "Sideband-asymmetry spectra, Langevin oracle and calibration"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Sym,
    Normal,
}

impl From<Kind> for SpectrumKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Sym => SpectrumKind::Symmetrized,
            Kind::Normal => SpectrumKind::NormalOrdered,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Single,
    Multitone,
    FullRwa,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Output spectrum on the config grid (or a default one).
    Spectrum {
        /// Config file or preset name.
        config: String,
        #[arg(long, value_enum, default_value = "sym")]
        kind: Kind,
        #[arg(long, value_enum, default_value = "multitone")]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Integrated sideband asymmetry and the sideband-ratio model.
    Asymmetry {
        config: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs the Langevin oracle and compares with the analytic spectrum.
    OracleCompare {
        /// Config file (needs an `oracle` section) or preset name.
        #[arg(required_unless_present = "canonical", conflicts_with = "canonical")]
        config: Option<String>,
        /// One of the built-in scaled-unit setups instead of a config.
        #[arg(long)]
        canonical: Option<String>,
        /// Scales the Welch segment count of a canonical setup.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trajectories: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Calibration chain on a data directory or on synthetic data.
    Calibrate {
        #[arg(required_unless_present = "synthetic", conflicts_with = "synthetic")]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        synthetic: bool,
        /// Device parameters and calibration constants.
        #[arg(long, default_value = "si-figure")]
        config: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Relative measurement noise of the synthetic data.
        #[arg(long, default_value_t = 0.01)]
        noise: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Heisenberg constraint on the detector noise of a single-tone config.
    NoiseConstraint {
        config: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] sideband_core::Error),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Usage(String),
}

fn gate_exit_code(e: &sideband_core::Error) -> i32 {
    use sideband_core::Error as E;
    match e {
        E::InvalidParameter { .. } => 2,
        E::Instability { .. } | E::Validity(_) | E::Unbalanced { .. } | E::StepSize(_) => 3,
        E::NonConvergence { .. } | E::DegenerateData(_) | E::RankDeficient(_) => 1,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(ConfigError::Model(e)) | CliError::Model(e) => gate_exit_code(e),
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
        }
    }

    /// The stderr line.
    pub fn message(&self) -> String {
        match self {
            CliError::Config(ConfigError::Model(e)) | CliError::Model(e) => {
                format!("error: {}: {e}", e.gate_name())
            }
            CliError::Config(e) => format!("error: ConfigError: {e}"),
            CliError::Io(e) => format!("error: IoError: {e}"),
            CliError::Usage(e) => format!("error: UsageError: {e}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.message());
            e.exit_code()
        }
    }
}

pub fn execute(cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Spectrum {
            config,
            kind,
            mode,
            out,
        } => cmd_spectrum(config, *kind, *mode, out),
        Command::Asymmetry { config, out } => cmd_asymmetry(config, out),
        Command::OracleCompare {
            config,
            canonical,
            scale,
            seed,
            trajectories,
            out,
        } => cmd_oracle_compare(
            config.as_deref(),
            canonical.as_deref(),
            *scale,
            *seed,
            *trajectories,
            out,
        ),
        Command::Calibrate {
            data_dir,
            synthetic,
            config,
            seed,
            noise,
            out,
        } => cmd_calibrate(data_dir.as_deref(), *synthetic, config, *seed, *noise, out),
        Command::NoiseConstraint { config, out } => cmd_noise_constraint(config, out),
    }
}

fn prepare_out(out: &Path) -> CliResult<()> {
    fs::create_dir_all(out).map_err(|source| {
        CliError::Io(IoError::Fs {
            path: out.display().to_string(),
            source,
        })
    })
}

fn load(config: &str) -> CliResult<(Config, Resolved, String)> {
    let c = Config::load(config)?;
    let hash = c.hash()?;
    let r = c.build()?;
    Ok((c, r, hash))
}

fn print_json<T: Serialize>(v: &T) {
    use std::io::Write;
    // a closed pipe is not an error; the report is on disk
    let _ = writeln!(
        std::io::stdout(),
        "{}",
        serde_json::to_string_pretty(v).expect("report serializes")
    );
}

fn only_tone(r: &Resolved) -> CliResult<&sideband_core::ToneSpec> {
    match r.tones.tones() {
        [t] => Ok(t),
        ts => Err(CliError::Usage(format!(
            "this command needs exactly one tone, the config has {}",
            ts.len()
        ))),
    }
}

fn single_gamma_tot(r: &Resolved, tone: &sideband_core::ToneSpec) -> f64 {
    let g_opt = tone.gamma_opt(&r.params);
    let g = match tone.sideband() {
        Sideband::Red => r.params.gamma_m() + g_opt,
        Sideband::Blue => r.params.gamma_m() - g_opt,
    };
    if g > 0.0 {
        g
    } else {
        r.params.gamma_m()
    }
}

const DEFAULT_POINTS: usize = 4001;

fn cmd_spectrum(config: &str, kind: Kind, mode: Mode, out: &Path) -> CliResult<()> {
    let (c, r, hash) = load(config)?;
    let (p, b) = (&r.params, &r.baths);
    let grid_from_config = c
        .grid
        .as_ref()
        .map(|g| linspace(TWO_PI * g.min_hz, TWO_PI * g.max_hz, g.points));
    prepare_out(out)?;
    let mut manifest = RunManifest::new("spectrum", hash);
    match mode {
        Mode::Single => {
            let tone = only_tone(&r)?;
            let g = single_gamma_tot(&r, tone);
            let grid =
                grid_from_config.unwrap_or_else(|| linspace(-10.0 * g, 10.0 * g, DEFAULT_POINTS));
            let spec = single_tone_spectrum(
                p,
                b,
                tone,
                tone.sideband(),
                kind.into(),
                &grid,
                &EvalOptions::default(),
            )?;
            write_spectrum(&out.join("spectrum.csv"), &spec)?;
            manifest.outputs.push("spectrum.csv".into());
        }
        Mode::Multitone | Mode::FullRwa => {
            let rates = multitone_rates(p, b, &r.tones)?;
            let d = r.tones.delta();
            let g = rates.gamma_tot.abs();
            let half = if d > 0.0 {
                (2.0 * d).max(d + 10.0 * g)
            } else {
                10.0 * g
            };
            let grid = grid_from_config.unwrap_or_else(|| linspace(-half, half, DEFAULT_POINTS));
            let hz: Vec<f64> = grid.iter().map(|w| w / TWO_PI).collect();
            let (total, anti, stokes) = if mode == Mode::Multitone {
                let s = multitone_spectra(p, b, &r.tones, kind.into(), &grid)?;
                (
                    s.total(),
                    s.anti_stokes.values().to_vec(),
                    s.stokes.values().to_vec(),
                )
            } else {
                if kind != Kind::Sym {
                    return Err(CliError::Usage(
                        "full-rwa spectra are symmetrized only".into(),
                    ));
                }
                let s = full_rwa_spectrum(p, b, &r.tones, &grid)?;
                (s.total(), s.anti_stokes.clone(), s.stokes.clone())
            };
            write_spectrum(&out.join("spectrum.csv"), &total)?;
            write_columns(
                &out.join("components.csv"),
                &["freq_hz", "anti_stokes", "stokes"],
                &[&hz, &anti, &stokes],
            )?;
            manifest.outputs.push("spectrum.csv".into());
            manifest.outputs.push("components.csv".into());
        }
    }
    manifest.write(out)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct RatioModel {
    /// Anti-Stokes bracket n̄_m − n_eff.
    n_plus: f64,
    /// Stokes bracket n̄_m + n_eff + 1.
    n_minus: f64,
    ratio: f64,
    /// 2n_eff + 1.
    offset: f64,
}

#[derive(Debug, Serialize)]
struct AsymmetryReport {
    config_hash: String,
    #[serde(rename = "delta_I_sym")]
    delta_i_sym: f64,
    #[serde(rename = "delta_I_normal")]
    delta_i_normal: f64,
    ratio_model: Option<RatioModel>,
    n_eff: f64,
}

fn cmd_asymmetry(config: &str, out: &Path) -> CliResult<()> {
    let (_, r, hash) = load(config)?;
    let (p, b) = (&r.params, &r.baths);
    let two_probe = r.tones.red_probe().is_some() && r.tones.blue_probe().is_some();
    let (sym, normal, n_bar_m, n_eff) = if two_probe {
        let rates = multitone_rates(p, b, &r.tones)?;
        let diff = |kind| -> CliResult<f64> {
            let s = multitone_spectra(p, b, &r.tones, kind, &[0.0])?;
            Ok(s.stokes_weight - s.anti_stokes_weight)
        };
        (
            diff(SpectrumKind::Symmetrized)?,
            diff(SpectrumKind::NormalOrdered)?,
            rates.n_bar_m,
            rates.n_eff,
        )
    } else {
        let tone = only_tone(&r)?;
        let sym = integrated_asymmetry(p, b, tone, SpectrumKind::Symmetrized);
        let normal = integrated_asymmetry(p, b, tone, SpectrumKind::NormalOrdered);
        (sym, normal, b.n_m, b.n_eff(p))
    };
    let n_plus = n_bar_m - n_eff;
    let ratio_model = sideband_ratio_model(n_plus, n_eff)
        .ok()
        .map(|ratio| RatioModel {
            n_plus,
            n_minus: n_bar_m + n_eff + 1.0,
            ratio,
            offset: 2.0 * n_eff + 1.0,
        });
    let report = AsymmetryReport {
        config_hash: hash.clone(),
        delta_i_sym: sym,
        delta_i_normal: normal,
        ratio_model,
        n_eff,
    };
    prepare_out(out)?;
    write_json(&out.join("asymmetry.json"), &report)?;
    let mut m = RunManifest::new("asymmetry", hash);
    m.outputs.push("asymmetry.json".into());
    m.write(out)?;
    print_json(&report);
    Ok(())
}

#[derive(Debug, Serialize)]
struct OracleReport {
    config_hash: String,
    /// First compared peak; every peak is listed in `comparison`.
    analytic_weight: f64,
    mc_weight: f64,
    rel_err: f64,
    n_segments: usize,
    seed: u64,
    pass: bool,
    comparison: crate::oracle::Comparison,
}

fn cmd_oracle_compare(
    config: Option<&str>,
    canonical: Option<&str>,
    scale: f64,
    seed: u64,
    trajectories: Option<usize>,
    out: &Path,
) -> CliResult<()> {
    let (params, baths, tones, mut sim, hash) = match (config, canonical) {
        (_, Some(name)) => {
            let all = canonical_configs(seed, scale);
            let names: Vec<&str> = all.iter().map(|c| c.name).collect();
            let c = all.into_iter().find(|c| c.name == name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown canonical setup `{name}`; known: {}",
                    names.join(", ")
                ))
            })?;
            let desc = format!(
                "canonical {} scale={scale} {:?} {:?} {:?}",
                c.name, c.params, c.baths, c.tones
            );
            (
                c.params,
                c.baths,
                c.tones,
                c.sim,
                hex::encode(Sha256::digest(desc.as_bytes())),
            )
        }
        (Some(path), None) => {
            let (c, r, hash) = load(path)?;
            let o = c.oracle.ok_or_else(|| {
                ConfigError::Invalid("oracle-compare needs an `oracle` section".into())
            })?;
            let sim = SimConfig::from_segments(
                o.dt_s,
                o.segment_len,
                o.segments_per_trajectory,
                o.trajectories,
                o.burn_in_steps,
                seed,
            );
            (r.params, r.baths, r.tones, sim, hash)
        }
        (None, None) => return Err(CliError::Usage("give a config or --canonical".into())),
    };
    if let Some(t) = trajectories {
        sim.n_trajectories = t;
    }
    let cmp = compare(&params, &baths, &tones, &sim)?;
    let first = cmp.peaks.iter().find(|p| p.compared).or(cmp.peaks.first());
    let report = OracleReport {
        config_hash: hash.clone(),
        analytic_weight: first.map_or(f64::NAN, |p| p.analytic_weight),
        mc_weight: first.map_or(f64::NAN, |p| p.mc_weight),
        rel_err: first.map_or(f64::NAN, |p| p.rel_err),
        n_segments: cmp.n_segments,
        seed,
        pass: cmp.pass(),
        comparison: cmp,
    };
    prepare_out(out)?;
    write_json(&out.join("oracle_report.json"), &report)?;
    write_spectrum(&out.join("mc_spectrum.csv"), &report.comparison.mc_spectrum)?;
    write_spectrum(
        &out.join("analytic_spectrum.csv"),
        &report.comparison.analytic_spectrum(),
    )?;
    let mut m = RunManifest::new("oracle-compare", hash);
    m.seed = Some(seed);
    m.rng = Some(RNG_ALGORITHM.into());
    m.outputs.extend(
        [
            "oracle_report.json",
            "mc_spectrum.csv",
            "analytic_spectrum.csv",
        ]
        .map(String::from),
    );
    m.write(out)?;
    print_json(&report);
    Ok(())
}

#[derive(Debug, Serialize)]
struct CalibrateOutput {
    mode: &'static str,
    config_hash: String,
    seed: Option<u64>,
    noise: Option<f64>,
    #[serde(flatten)]
    report: CalibrationReport,
}

fn cmd_calibrate(
    data_dir: Option<&Path>,
    synthetic: bool,
    config: &str,
    seed: u64,
    noise: f64,
    out: &Path,
) -> CliResult<()> {
    let (c, r, hash) = load(config)?;
    let cal = c.calibration.clone().unwrap_or_default();
    prepare_out(out)?;
    let mut m = RunManifest::new("calibrate", hash.clone());
    let (mode, dir, delta) = if synthetic {
        let mut s = SyntheticSettings {
            noise,
            seed,
            ..Default::default()
        };
        if c.delta_hz > 0.0 {
            s.probe_delta_hz = c.delta_hz;
        }
        if cal.c_out_f > 0.0 {
            s.c_out_f = cal.c_out_f;
        }
        let data = generate(&r.params, &r.baths, &cal, &s)?;
        // the analysis reads back the files it reports hashes for
        let dir = out.join("data");
        prepare_out(&dir)?;
        for f in write_data_dir(&dir, &data)? {
            m.outputs.push(format!("data/{f}"));
        }
        m.seed = Some(seed);
        m.rng =
            Some("ChaCha8 (rand_chacha), seed_from_u64(seed); Gaussian noise (rand_distr)".into());
        ("synthetic", dir, TWO_PI * s.probe_delta_hz)
    } else {
        let dir = data_dir
            .ok_or_else(|| CliError::Usage("give a data directory or --synthetic".into()))?;
        ("data_dir", dir.to_path_buf(), TWO_PI * c.delta_hz)
    };
    let data = load_data_dir(&dir)?;
    if data.inputs.is_empty() {
        return Err(CliError::Usage(format!(
            "{} holds no calibration files",
            dir.display()
        )));
    }
    let report = analyze(&r.params, delta, &data, &cal)?;
    let output = CalibrateOutput {
        mode,
        config_hash: hash,
        seed: synthetic.then_some(seed),
        noise: synthetic.then_some(noise),
        report,
    };
    write_json(&out.join("calibration.json"), &output)?;
    m.outputs.push("calibration.json".into());
    m.write(out)?;
    print_json(&output);
    Ok(())
}

#[derive(Debug, Serialize)]
struct Cplx {
    re: f64,
    im: f64,
}

#[derive(Debug, Serialize)]
struct NoiseConstraintReport {
    config_hash: String,
    #[serde(rename = "S_zF")]
    s_zf: Cplx,
    lhs: f64,
    rhs: f64,
    gap: f64,
    s_zz: f64,
    s_ff: f64,
    satisfied: bool,
}

fn cmd_noise_constraint(config: &str, out: &Path) -> CliResult<()> {
    let (_, r, hash) = load(config)?;
    let tone = only_tone(&r)?;
    let sb = tone.sideband();
    let det = detector_correlators(
        &r.params,
        &r.baths,
        tone,
        sb,
        sb.sign() * r.params.omega_m(),
        &LrOptions::default(),
    )?;
    let nc = heisenberg_gap(det.s_zz(), det.s_ff, det.s_zf)?;
    let report = NoiseConstraintReport {
        config_hash: hash.clone(),
        s_zf: Cplx {
            re: det.s_zf.re,
            im: det.s_zf.im,
        },
        lhs: nc.lhs,
        rhs: nc.rhs,
        gap: nc.gap(),
        s_zz: det.s_zz(),
        s_ff: det.s_ff,
        satisfied: nc.satisfied,
    };
    prepare_out(out)?;
    write_json(&out.join("noise_constraint.json"), &report)?;
    let mut m = RunManifest::new("noise-constraint", hash);
    m.outputs.push("noise_constraint.json".into());
    m.write(out)?;
    print_json(&report);
    Ok(())
}
