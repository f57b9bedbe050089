//! JSON run configuration. Frequencies and rates are given in Hz and become
//! rad/s here, on the way in.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sideband_core::{BathSpec, SystemParams, ToneConfig, ToneRole, ToneSpec, TWO_PI};
use std::path::Path;

use crate::calibrate::CalibrationSettings;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] sideband_core::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub omega_c_hz: f64,
    pub omega_m_hz: f64,
    pub g0_hz: f64,
    pub kappa_l_hz: f64,
    pub kappa_r_hz: f64,
    pub kappa_i_hz: f64,
    pub gamma_m_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_zp_m: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSection {
    #[serde(default)]
    pub n_r: f64,
    #[serde(default)]
    pub n_l: f64,
    #[serde(default)]
    pub n_i: f64,
    #[serde(default)]
    pub n_m: f64,
    #[serde(default = "one")]
    pub alpha_r: f64,
    #[serde(default = "one")]
    pub alpha_l: f64,
    #[serde(default = "one")]
    pub alpha_i: f64,
    #[serde(default = "one")]
    pub beta: f64,
}

impl Default for BathSection {
    fn default() -> Self {
        Self {
            n_r: 0.0,
            n_l: 0.0,
            n_i: 0.0,
            n_m: 0.0,
            alpha_r: 1.0,
            alpha_l: 1.0,
            alpha_i: 1.0,
            beta: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    RedProbe,
    BlueProbe,
    Cooling,
    Generic,
}

impl From<Role> for ToneRole {
    fn from(r: Role) -> Self {
        match r {
            Role::RedProbe => ToneRole::RedProbe,
            Role::BlueProbe => ToneRole::BlueProbe,
            Role::Cooling => ToneRole::Cooling,
            Role::Generic => ToneRole::Generic,
        }
    }
}

/// One tone: either `n_p` or `g_hz`. The detuning ω_p − ω_c defaults from the
/// role: −(ω_m + δ), +(ω_m + δ), −(ω_m + δ_c).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToneSection {
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_hz: Option<f64>,
}

/// Offsets from the cavity resonance, Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub min_hz: f64,
    pub max_hz: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub dt_s: f64,
    /// Welch segment length in steps (a power of two is fastest).
    pub segment_len: usize,
    pub segments_per_trajectory: usize,
    pub trajectories: usize,
    #[serde(default)]
    pub burn_in_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub system: SystemSection,
    #[serde(default)]
    pub baths: BathSection,
    #[serde(default)]
    pub tones: Vec<ToneSection>,
    #[serde(default)]
    pub delta_hz: f64,
    #[serde(default)]
    pub delta_c_hz: f64,
    #[serde(default)]
    pub allow_close_sidebands: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationSettings>,
}

/// The model objects a config describes, in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub params: SystemParams,
    pub baths: BathSpec,
    pub tones: ToneConfig,
}

pub const PRESETS: [(&str, &str); 2] = [
    ("main-text", include_str!("../presets/main-text.json")),
    ("si-figure", include_str!("../presets/si-figure.json")),
];

impl Config {
    pub fn from_json(s: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(s)?)
    }

    /// A preset name ("main-text", "si-figure") or a path to a JSON file.
    pub fn load(path_or_preset: &str) -> Result<Self, ConfigError> {
        if let Some((_, s)) = PRESETS.iter().find(|(n, _)| *n == path_or_preset) {
            return Self::from_json(s);
        }
        let path = Path::new(path_or_preset);
        let s = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&s)
    }

    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown preset `{name}`")))
            .and_then(|(_, s)| Self::from_json(s))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Copy with every defaulted detuning written out.
    pub fn resolved(&self) -> Result<Self, ConfigError> {
        let mut out = self.clone();
        for t in &mut out.tones {
            if t.n_p.is_some() == t.g_hz.is_some() {
                return Err(ConfigError::Invalid(format!(
                    "{:?} tone needs exactly one of n_p, g_hz",
                    t.role
                )));
            }
            if t.detuning_hz.is_none() {
                let wm = self.system.omega_m_hz;
                t.detuning_hz = Some(match t.role {
                    Role::RedProbe => -(wm + self.delta_hz),
                    Role::BlueProbe => wm + self.delta_hz,
                    Role::Cooling => -(wm + self.delta_c_hz),
                    Role::Generic => {
                        return Err(ConfigError::Invalid(
                            "generic tones need an explicit detuning_hz".into(),
                        ))
                    }
                });
            }
        }
        Ok(out)
    }

    /// sha256 of the fully resolved config, hex.
    pub fn hash(&self) -> Result<String, ConfigError> {
        let canonical = serde_json::to_vec(&self.resolved()?)?;
        Ok(hex::encode(Sha256::digest(&canonical)))
    }

    pub fn build(&self) -> Result<Resolved, ConfigError> {
        let c = self.resolved()?;
        let s = &c.system;
        let mut params = SystemParams::new(
            TWO_PI * s.omega_c_hz,
            TWO_PI * s.omega_m_hz,
            TWO_PI * s.g0_hz,
            TWO_PI * s.kappa_l_hz,
            TWO_PI * s.kappa_r_hz,
            TWO_PI * s.kappa_i_hz,
            TWO_PI * s.gamma_m_hz,
        )?;
        if let Some(x) = s.x_zp_m {
            params = params.with_x_zp(x)?;
        }
        let b = &c.baths;
        let baths = BathSpec {
            n_r: b.n_r,
            n_l: b.n_l,
            n_i: b.n_i,
            n_m: b.n_m,
            alpha_r: b.alpha_r,
            alpha_l: b.alpha_l,
            alpha_i: b.alpha_i,
            beta: b.beta,
        };
        baths.validate()?;
        let tones = c
            .tones
            .iter()
            .map(|t| {
                let det = TWO_PI * t.detuning_hz.expect("resolved");
                match (t.n_p, t.g_hz) {
                    (Some(n), None) => ToneSpec::from_photons(&params, det, n, t.role.into()),
                    (None, Some(g)) => ToneSpec::from_coupling(det, TWO_PI * g, t.role.into()),
                    _ => unreachable!("checked in resolved()"),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let tones = ToneConfig::new(
            &params,
            tones,
            TWO_PI * c.delta_hz,
            TWO_PI * c.delta_c_hz,
            c.allow_close_sidebands,
        )?;
        Ok(Resolved {
            params,
            baths,
            tones,
        })
    }
}
