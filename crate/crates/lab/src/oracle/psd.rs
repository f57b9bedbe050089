//! Welch periodogram of the complex output field.
//!
//! S(ω) = dt·|Σ_j w_j x_j e^{iωt_j}|² / Σ_j w_j², averaged over
//! non-overlapping Hann-windowed segments and reported two-sided on the
//! offset grid ω_k = 2πk/(N·dt), k = −N/2 … N/2 − 1. A white input with
//! ⟨|x|²⟩ = (n + ½)/dt gives n + ½.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use sideband_core::Spectrum;
use std::sync::Arc;

use super::integrate::TrajectoryOutput;

/// Streaming Welch accumulator; feed samples one at a time.
pub struct Welch {
    window: Vec<f64>,
    window_power: f64,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
    fill: usize,
    sum: Vec<f64>,
    segments: usize,
    dt: f64,
}

impl Welch {
    pub fn new(segment_len: usize, dt: f64) -> Self {
        assert!(segment_len >= 2, "segments need at least two samples");
        let n = segment_len;
        let window: Vec<f64> = (0..n)
            .map(|j| {
                let s = (std::f64::consts::PI * j as f64 / n as f64).sin();
                s * s
            })
            .collect();
        let window_power = window.iter().map(|w| w * w).sum();
        // rustfft's inverse transform carries e^{+2πijk/N}, matching e^{iωt}
        let fft = FftPlanner::new().plan_fft_inverse(n);
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        Self {
            window,
            window_power,
            fft,
            buf: vec![Complex64::default(); n],
            scratch,
            fill: 0,
            sum: vec![0.0; n],
            segments: 0,
            dt,
        }
    }

    #[inline]
    pub fn push(&mut self, x: Complex64) {
        self.buf[self.fill] = x * self.window[self.fill];
        self.fill += 1;
        if self.fill == self.buf.len() {
            self.fft
                .process_with_scratch(&mut self.buf, &mut self.scratch);
            for (s, b) in self.sum.iter_mut().zip(&self.buf) {
                *s += b.norm_sqr();
            }
            self.segments += 1;
            self.fill = 0;
        }
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    /// Adds another accumulator's completed segments.
    pub fn merge(&mut self, other: &Welch) {
        assert_eq!(self.sum.len(), other.sum.len(), "segment lengths differ");
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        self.segments += other.segments;
    }

    pub fn spectrum(&self) -> Spectrum {
        assert!(self.segments > 0, "no complete segment accumulated");
        let n = self.sum.len();
        let scale = self.dt / (self.window_power * self.segments as f64);
        let df = 2.0 * std::f64::consts::PI / (n as f64 * self.dt);
        let half = n / 2;
        let (mut grid, mut values) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..n {
            // fftshift: negative frequencies first
            let k = (i + n - half) % n;
            let signed = if k >= n - half {
                k as isize - n as isize
            } else {
                k as isize
            };
            grid.push(signed as f64 * df);
            values.push(self.sum[k] * scale);
        }
        Spectrum::new(grid, values).expect("finite periodogram")
    }
}

/// Welch estimate of a stored trajectory split into `psd_segments` pieces.
pub fn estimate_psd(traj: &TrajectoryOutput, psd_segments: usize) -> Spectrum {
    estimate_psd_ensemble(std::slice::from_ref(traj), psd_segments)
}

/// Welch estimate averaged over several trajectories of equal length.
pub fn estimate_psd_ensemble(trajs: &[TrajectoryOutput], psd_segments: usize) -> Spectrum {
    let first = trajs.first().expect("at least one trajectory");
    let len = first.output_field.len();
    assert!(
        psd_segments > 0 && len % psd_segments == 0,
        "length {len} does not split into {psd_segments} segments"
    );
    let mut w = Welch::new(len / psd_segments, first.dt);
    for t in trajs {
        assert_eq!(t.output_field.len(), len, "trajectories differ in length");
        for &x in &t.output_field {
            w.push(x);
        }
    }
    w.spectrum()
}
