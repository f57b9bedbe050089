//! Discrete white input noise. Classical complex Gaussians with symmetrized
//! variances: ⟨|ξ|²⟩ per sample = (n + w/2)/dt, where w is the channel's
//! vacuum weight (α for the cavity ports, β for the mechanics).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use sideband_core::BathSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    R,
    L,
    I,
    Mechanical,
}

/// (n_σ + w_σ/2)/dt.
pub fn channel_variance(baths: &BathSpec, channel: Channel, dt: f64) -> f64 {
    let (n, w) = match channel {
        Channel::R => (baths.n_r, baths.alpha_r),
        Channel::L => (baths.n_l, baths.alpha_l),
        Channel::I => (baths.n_i, baths.alpha_i),
        Channel::Mechanical => (baths.n_m, baths.beta),
    };
    (n + 0.5 * w) / dt
}

/// Complex normal with ⟨|z|²⟩ = 2σ², independent real and imaginary parts.
#[inline]
pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sigma * re, sigma * im)
}

pub fn synthesize_input_noise<R: Rng + ?Sized>(
    baths: &BathSpec,
    channel: Channel,
    dt: f64,
    n_samples: usize,
    rng: &mut R,
) -> Vec<Complex64> {
    assert!(dt > 0.0, "dt must be positive");
    let sigma = (0.5 * channel_variance(baths, channel, dt)).sqrt();
    (0..n_samples).map(|_| complex_normal(rng, sigma)).collect()
}
