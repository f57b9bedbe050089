//! Floor plus Lorentzian peaks, y = f + Σ A/(1 + 4(x − c)²/w²).
//! `w` is the full width at half maximum and A·w/4 the weight ∫dx/2π.

use alloc::format;
use alloc::vec::Vec;
// Inherent float methods exist only when std is linked somewhere in the graph.
#[allow(unused_imports)]
use num_traits::Float;

use super::fit::{gauss_newton, GnOptions};
use crate::error::{Error, Result};
use crate::model::Spectrum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl Peak {
    pub fn value(&self, x: f64) -> f64 {
        let z = 2.0 * (x - self.center) / self.width;
        self.amplitude / (1.0 + z * z)
    }

    /// ∫dx/2π over the whole line.
    pub fn weight(&self) -> f64 {
        0.25 * self.amplitude * self.width
    }

    /// ∫dx/2π over [a, b].
    pub fn partial_weight(&self, a: f64, b: f64) -> f64 {
        let za = 2.0 * (a - self.center) / self.width;
        let zb = 2.0 * (b - self.center) / self.width;
        self.amplitude * self.width / 2.0 * (zb.atan() - za.atan()) / (2.0 * core::f64::consts::PI)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiLorentzianFit {
    pub floor: f64,
    pub peaks: Vec<Peak>,
    /// Parameter order: floor, then (center, width, amplitude) per peak.
    pub covariance: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl MultiLorentzianFit {
    fn cov(&self, i: usize, j: usize) -> f64 {
        self.covariance[i * (1 + 3 * self.peaks.len()) + j]
    }

    pub fn floor_sigma(&self) -> f64 {
        self.cov(0, 0).max(0.0).sqrt()
    }

    /// Standard deviation of peak `k`'s weight A·w/4.
    pub fn weight_sigma(&self, k: usize) -> f64 {
        let (iw, ia) = (2 + 3 * k, 3 + 3 * k);
        let p = &self.peaks[k];
        let (gw, ga) = (0.25 * p.amplitude, 0.25 * p.width);
        (gw * gw * self.cov(iw, iw) + ga * ga * self.cov(ia, ia) + 2.0 * gw * ga * self.cov(iw, ia))
            .max(0.0)
            .sqrt()
    }

    pub fn value(&self, x: f64) -> f64 {
        self.floor + self.peaks.iter().map(|p| p.value(x)).sum::<f64>()
    }
}

/// Least-squares fit of a floor plus `init_peaks.len()` Lorentzians.
pub fn fit_lorentzians(
    x: &[f64],
    y: &[f64],
    init_floor: f64,
    init_peaks: &[Peak],
) -> Result<MultiLorentzianFit> {
    fit_lorentzians_weighted(x, y, None, init_floor, init_peaks)
}

/// As [`fit_lorentzians`], with per-point standard deviations. Periodogram
/// estimates have σ ∝ S, so spectra with tall peaks want σ_k ∝ model value.
pub fn fit_lorentzians_weighted(
    x: &[f64],
    y: &[f64],
    sigmas: Option<&[f64]>,
    init_floor: f64,
    init_peaks: &[Peak],
) -> Result<MultiLorentzianFit> {
    if x.len() != y.len() {
        return Err(Error::invalid(
            "spectrum",
            "abscissa and values differ in length",
        ));
    }
    if let Some(s) = sigmas {
        if s.len() != x.len() || s.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::invalid(
                "sigmas",
                "need one positive sigma per point",
            ));
        }
    }
    let mut init = Vec::with_capacity(1 + 3 * init_peaks.len());
    init.push(init_floor);
    for p in init_peaks {
        if !(p.width > 0.0) {
            return Err(Error::invalid("width", "initial width must be positive"));
        }
        init.extend_from_slice(&[p.center, p.width, p.amplitude]);
    }
    let np = init.len();
    let res = gauss_newton(
        &init,
        x.len(),
        |q, r, j| {
            for (k, (&xk, &yk)) in x.iter().zip(y).enumerate() {
                let inv = sigmas.map_or(1.0, |s| 1.0 / s[k]);
                let row = &mut j[k * np..(k + 1) * np];
                let mut v = q[0];
                row[0] = 1.0;
                for m in 0..(np - 1) / 3 {
                    let (c, w, a) = (q[1 + 3 * m], q[2 + 3 * m], q[3 + 3 * m]);
                    let u = xk - c;
                    let d = 1.0 + 4.0 * u * u / (w * w);
                    let l = 1.0 / d;
                    v += a * l;
                    row[1 + 3 * m] = a * 8.0 * u / (w * w) * l * l;
                    row[2 + 3 * m] = a * 8.0 * u * u / (w * w * w) * l * l;
                    row[3 + 3 * m] = l;
                }
                r[k] = (v - yk) * inv;
                row.iter_mut().for_each(|e| *e *= inv);
            }
        },
        &GnOptions::default(),
    )?;
    let q = &res.params;
    let peaks: Vec<Peak> = (0..init_peaks.len())
        .map(|m| Peak {
            center: q[1 + 3 * m],
            width: q[2 + 3 * m].abs(),
            amplitude: q[3 + 3 * m],
        })
        .collect();
    if peaks.iter().any(|p| !(p.width > 0.0)) {
        return Err(Error::DegenerateData(
            "fitted width collapsed to zero".into(),
        ));
    }
    Ok(MultiLorentzianFit {
        floor: q[0],
        peaks,
        covariance: res.covariance,
        residual_norm: res.rss.sqrt(),
        iterations: res.iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianFit {
    pub center: f64,
    /// Full width at half maximum.
    pub width: f64,
    pub amplitude: f64,
    pub floor: f64,
    pub residual_norm: f64,
    /// Parameter order: center, width, amplitude, floor.
    pub covariance: [[f64; 4]; 4],
}

impl LorentzianFit {
    pub fn weight(&self) -> f64 {
        0.25 * self.amplitude * self.width
    }

    pub fn peak(&self) -> Peak {
        Peak {
            center: self.center,
            width: self.width,
            amplitude: self.amplitude,
        }
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite spectrum"));
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Peak location and half-maximum scan on a (possibly negative) peak.
pub fn initial_guess(x: &[f64], y: &[f64]) -> Result<(f64, Peak)> {
    let floor = median(y);
    let (k, dev) = y
        .iter()
        .enumerate()
        .map(|(k, v)| (k, v - floor))
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).expect("finite spectrum"))
        .ok_or_else(|| Error::DegenerateData("empty spectrum".into()))?;
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(dev.abs() > 1e-12 * scale) {
        return Err(Error::DegenerateData("spectrum is flat".into()));
    }
    let half = 0.5 * dev.abs();
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = k;
        for i in range {
            let d = (y[i] - floor) * dev.signum();
            if d < half {
                let dp = (y[prev] - floor) * dev.signum();
                let t = (dp - half) / (dp - d);
                return Some(x[prev] + t * (x[i] - x[prev]));
            }
            prev = i;
        }
        None
    };
    let left = crossing(&mut (0..k).rev());
    let right = crossing(&mut (k + 1..x.len()));
    let width = match (left, right) {
        (Some(l), Some(r)) => r - l,
        (Some(l), None) => 2.0 * (x[k] - l),
        (None, Some(r)) => 2.0 * (r - x[k]),
        (None, None) => {
            return Err(Error::DegenerateData(
                "peak does not fall to half maximum".into(),
            ))
        }
    };
    Ok((
        floor,
        Peak {
            center: x[k],
            width,
            amplitude: dev,
        },
    ))
}

/// Floor plus a single Lorentzian. Needs at least 20 points spanning five
/// widths.
pub fn fit_lorentzian(spec: &Spectrum, init: Option<&LorentzianFit>) -> Result<LorentzianFit> {
    let (x, y) = (spec.freq_offsets(), spec.values());
    if x.len() < 20 {
        return Err(Error::DegenerateData(format!(
            "{} points; at least 20 are needed",
            x.len()
        )));
    }
    let (floor, peak) = match init {
        Some(f) => (f.floor, f.peak()),
        None => initial_guess(x, y)?,
    };
    let span = x[x.len() - 1] - x[0];
    if span < 5.0 * peak.width {
        return Err(Error::DegenerateData(format!(
            "span {span} covers fewer than five widths ({})",
            peak.width
        )));
    }
    let f = fit_lorentzians(x, y, floor, &[peak])?;
    // reorder from (floor, c, w, A) to (c, w, A, floor)
    let map = [1, 2, 3, 0];
    let mut cov = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            cov[i][j] = f.cov(map[i], map[j]);
        }
    }
    let p = f.peaks[0];
    Ok(LorentzianFit {
        center: p.center,
        width: p.width,
        amplitude: p.amplitude,
        floor: f.floor,
        residual_norm: f.residual_norm,
        covariance: cov,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::linspace;

    fn synth(peak: Peak, floor: f64, x: &[f64]) -> Spectrum {
        Spectrum::new(
            x.to_vec(),
            x.iter().map(|&v| floor + peak.value(v)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn exact_lorentzian_recovered() {
        let truth = Peak {
            center: 1234.0,
            width: crate::TWO_PI * 360.0,
            amplitude: 3.7,
        };
        let x = linspace(
            truth.center - 20.0 * truth.width,
            truth.center + 20.0 * truth.width,
            401,
        );
        let f = fit_lorentzian(&synth(truth, 0.61, &x), None).unwrap();
        assert!((f.center - truth.center).abs() < 1e-8 * truth.width);
        assert!((f.width / truth.width - 1.0).abs() < 1e-8);
        assert!((f.amplitude / truth.amplitude - 1.0).abs() < 1e-8);
        assert!((f.floor / 0.61 - 1.0).abs() < 1e-8);
        assert!((f.weight() - truth.weight()).abs() < 1e-8 * truth.weight());
    }

    #[test]
    fn negative_dip_recovered() {
        let truth = Peak {
            center: -5.0,
            width: 3.0,
            amplitude: -0.2,
        };
        let x = linspace(-40.0, 30.0, 301);
        let f = fit_lorentzian(&synth(truth, 1.0, &x), None).unwrap();
        assert!((f.amplitude / truth.amplitude - 1.0).abs() < 1e-8);
    }

    #[test]
    fn flat_and_sparse_inputs_are_degenerate() {
        let x = linspace(0.0, 1.0, 50);
        let flat = Spectrum::new(x.clone(), alloc::vec![0.5; 50]).unwrap();
        assert!(matches!(
            fit_lorentzian(&flat, None),
            Err(Error::DegenerateData(_))
        ));
        let few = synth(
            Peak {
                center: 0.5,
                width: 0.01,
                amplitude: 1.0,
            },
            0.0,
            &linspace(0.0, 1.0, 10),
        );
        assert!(matches!(
            fit_lorentzian(&few, None),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn weights_do_not_move_an_exact_fit() {
        let a = Peak {
            center: 2.0,
            width: 0.5,
            amplitude: 40.0,
        };
        let x = linspace(-5.0, 9.0, 281);
        let y: Vec<f64> = x.iter().map(|&v| 0.5 + a.value(v)).collect();
        let init = [Peak {
            center: 2.1,
            width: 0.6,
            amplitude: 30.0,
        }];
        let f = fit_lorentzians_weighted(&x, &y, Some(&y), 0.4, &init).unwrap();
        assert!((f.peaks[0].weight() / a.weight() - 1.0).abs() < 1e-9);
        assert!((f.floor - 0.5).abs() < 1e-10);
        assert!(fit_lorentzians_weighted(&x, &y, Some(&y[1..]), 0.4, &init).is_err());
    }

    #[test]
    fn twin_peaks_with_overlapping_tails() {
        let a = Peak {
            center: -10.0,
            width: 2.0,
            amplitude: 1.5,
        };
        let b = Peak {
            center: 10.0,
            width: 2.0,
            amplitude: 3.0,
        };
        let x = linspace(-40.0, 40.0, 801);
        let y: Vec<f64> = x.iter().map(|&v| 0.5 + a.value(v) + b.value(v)).collect();
        let init = [
            Peak {
                center: -9.0,
                width: 3.0,
                amplitude: 1.0,
            },
            Peak {
                center: 9.5,
                width: 1.0,
                amplitude: 2.0,
            },
        ];
        let f = fit_lorentzians(&x, &y, 0.4, &init).unwrap();
        assert!((f.peaks[0].weight() / a.weight() - 1.0).abs() < 1e-9);
        assert!((f.peaks[1].weight() / b.weight() - 1.0).abs() < 1e-9);
        assert!((f.floor - 0.5).abs() < 1e-10);
    }

    #[test]
    fn partial_weight_of_full_line() {
        let p = Peak {
            center: 1.0,
            width: 0.5,
            amplitude: 2.0,
        };
        assert!((p.partial_weight(-1e9, 1e9) - p.weight()).abs() < 1e-9);
    }
}
