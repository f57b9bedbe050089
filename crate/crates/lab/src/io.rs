//! CSV spectra and traces (`# freq_hz,value`), JSON reports and run manifests.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sideband_core::{Spectrum, TWO_PI};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Fs {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
}

fn fs_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Fs {
        path: path.display().to_string(),
        source,
    }
}

/// Writes named columns; the first column is written as is (already in Hz).
pub fn write_columns(path: &Path, names: &[&str], columns: &[&[f64]]) -> Result<(), IoError> {
    let mut f = fs::File::create(path).map_err(fs_err(path))?;
    writeln!(f, "# {}", names.join(",")).map_err(fs_err(path))?;
    let mut w = csv::Writer::from_writer(f);
    let n = columns.first().map_or(0, |c| c.len());
    for i in 0..n {
        let row: Vec<String> = columns.iter().map(|c| format!("{:.17e}", c[i])).collect();
        w.write_record(&row).map_err(|source| IoError::Csv {
            path: path.display().to_string(),
            source,
        })?;
    }
    w.flush().map_err(fs_err(path))
}

/// Writes a spectrum whose offsets are in rad/s as `freq_hz,value`.
pub fn write_spectrum(path: &Path, spec: &Spectrum) -> Result<(), IoError> {
    let hz: Vec<f64> = spec.freq_offsets().iter().map(|w| w / TWO_PI).collect();
    write_columns(path, &["freq_hz", "value"], &[&hz, spec.values()])
}

/// Reads the first two columns of a `# freq_hz,value` file, Hz kept as Hz.
pub fn read_columns(path: &Path) -> Result<(Vec<f64>, Vec<f64>), IoError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| IoError::Csv {
            path: path.display().to_string(),
            source,
        })?;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(|source| IoError::Csv {
            path: path.display().to_string(),
            source,
        })?;
        let parse = |i: usize| -> Result<f64, IoError> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| IoError::Format {
                    path: path.display().to_string(),
                    reason: format!(
                        "line {}: expected two numeric columns",
                        rec.position().map_or(0, |p| p.line())
                    ),
                })
        };
        x.push(parse(0)?);
        y.push(parse(1)?);
    }
    Ok((x, y))
}

/// Reads a spectrum file, converting the frequency column to rad/s.
pub fn read_spectrum(path: &Path) -> Result<Spectrum, IoError> {
    let (x, y) = read_columns(path)?;
    Spectrum::new(x.iter().map(|f| f * TWO_PI).collect(), y).map_err(|e| IoError::Format {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let s = serde_json::to_string_pretty(value).expect("report serializes");
    fs::write(path, s + "\n").map_err(fs_err(path))
}

pub fn file_sha256(path: &Path) -> Result<String, IoError> {
    let bytes = fs::read(path).map_err(fs_err(path))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub rng: Option<String>,
    pub outputs: Vec<String>,
    pub tool_version: String,
}

impl RunManifest {
    pub fn new(command: &str, config_hash: String) -> Self {
        Self {
            command: command.into(),
            config_hash,
            seed: None,
            rng: None,
            outputs: Vec::new(),
            tool_version: TOOL_VERSION.into(),
        }
    }

    /// Writes `manifest.json` into `dir`; the manifest lists itself last.
    pub fn write(mut self, dir: &Path) -> Result<PathBuf, IoError> {
        let path = dir.join("manifest.json");
        self.outputs.push("manifest.json".into());
        write_json(&path, &self)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let s = Spectrum::new(
            vec![-TWO_PI * 5e3, 0.0, TWO_PI * 1.25e3],
            vec![0.5, 1.0 / 3.0, 2.0],
        )
        .unwrap();
        write_spectrum(&p, &s).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("# freq_hz,value\n"));
        let back = read_spectrum(&p).unwrap();
        for (a, b) in back.freq_offsets().iter().zip(s.freq_offsets()) {
            assert!((a - b).abs() <= 1e-12 * b.abs());
        }
        assert_eq!(back.values(), s.values());
    }

    #[test]
    fn malformed_rows_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        fs::write(&p, "# freq_hz,value\n1.0,2.0\n3.0,abc\n").unwrap();
        assert!(matches!(read_columns(&p), Err(IoError::Format { .. })));
    }
}
