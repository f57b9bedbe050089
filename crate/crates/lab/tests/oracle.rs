use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sideband_core::multitone::{multitone_rates, sideband_ratio_model};
use sideband_core::{BathSpec, SystemParams, ToneConfig, ToneRole, ToneSpec};
use sideband_lab::oracle::*;

fn scaled(kr: f64, kl: f64, gm: f64) -> SystemParams {
    SystemParams::new(1e3, 10.0, 1e-3, kl, kr, 0.0, gm).unwrap()
}

fn no_tones(p: &SystemParams) -> ToneConfig {
    ToneConfig::new(p, vec![], 0.0, 0.0, false).unwrap()
}

fn red(p: &SystemParams, g: f64) -> ToneConfig {
    let t = ToneSpec::from_coupling(-(p.omega_m() + 0.04), g, ToneRole::RedProbe).unwrap();
    ToneConfig::new(p, vec![t], 0.04, 0.0, false).unwrap()
}

#[test]
fn noise_variance_and_independence() {
    let baths = BathSpec {
        n_r: 0.0,
        n_l: 3.0,
        alpha_r: 1.0,
        ..BathSpec::thermal(0.0, 3.0, 0.0, 0.0)
    };
    let dt = 0.01;
    let n = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let r = synthesize_input_noise(&baths, Channel::R, dt, n, &mut rng);
    let l = synthesize_input_noise(&baths, Channel::L, dt, n, &mut rng);
    // vacuum: half a quantum per unit bandwidth
    assert_eq!(channel_variance(&baths, Channel::R, dt), 0.5 / dt);
    for (x, target) in [(&r, 0.5 / dt), (&l, 3.5 / dt)] {
        let var = x.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!((var / target - 1.0).abs() < 0.01, "{var} vs {target}");
        let mean = x.iter().sum::<Complex64>() / n as f64;
        assert!(mean.norm() < 3.0 * (target / n as f64).sqrt());
        // real and imaginary parts carry half each and are uncorrelated
        let re = x.iter().map(|z| z.re * z.re).sum::<f64>() / n as f64;
        assert!((re / (0.5 * target) - 1.0).abs() < 0.01);
        let cross = x.iter().map(|z| z.re * z.im).sum::<f64>() / n as f64;
        assert!(cross.abs() < 3.0 * 0.5 * target / (n as f64).sqrt());
    }
    let c = r
        .iter()
        .zip(&l)
        .map(|(a, b)| a * b.conj())
        .sum::<Complex64>()
        / n as f64;
    let sigma = (0.5 / dt * 3.5 / dt / n as f64).sqrt();
    assert!(
        c.norm() < 3.0 * sigma,
        "cross-correlation {c} vs sigma {sigma}"
    );
}

#[test]
fn no_noise_means_no_output() {
    let p = scaled(0.6, 0.4, 0.01);
    let silent = BathSpec {
        alpha_r: 0.0,
        alpha_l: 0.0,
        alpha_i: 0.0,
        beta: 0.0,
        ..BathSpec::vacuum()
    };
    let sim = SimConfig::from_segments(0.04, 1024, 200, 1, 0, 3);
    let out = integrate_langevin(&p, &silent, &red(&p, 0.01), &sim).unwrap();
    assert!(out[0]
        .output_field
        .iter()
        .all(|z| *z == Complex64::new(0.0, 0.0)));
}

#[test]
fn free_mechanics_thermalizes() {
    let p = scaled(0.6, 0.4, 0.01);
    let baths = BathSpec::thermal(0.0, 0.0, 0.0, 100.0);
    let sim = SimConfig::from_segments(0.045, 1 << 16, 100, 1, 100_000, 2);
    let occ = mechanical_occupation(&p, &baths, &no_tones(&p), &sim).unwrap();
    // symmetrized convention: n_m + 1/2
    assert!((occ / 100.5 - 1.0).abs() < 0.02, "<|c|^2> = {occ}");
}

#[test]
fn seeds_fix_the_ensemble() {
    let p = scaled(0.6, 0.4, 0.01);
    let baths = BathSpec::thermal(0.1, 0.0, 0.0, 5.0);
    let cfg = red(&p, 0.01);
    let sim = SimConfig::from_segments(0.04, 4096, 32, 3, 100, 42);
    let a = integrate_langevin(&p, &baths, &cfg, &sim).unwrap();
    let b = integrate_langevin(&p, &baths, &cfg, &sim).unwrap();
    assert_eq!(a, b);
    // a trajectory does not depend on how many others run with it
    let one = integrate_langevin(
        &p,
        &baths,
        &cfg,
        &SimConfig {
            n_trajectories: 1,
            ..sim
        },
    )
    .unwrap();
    assert_eq!(one[0], a[0]);
    assert_ne!(a[0], a[1]);
    let other = integrate_langevin(&p, &baths, &cfg, &SimConfig { seed: 43, ..sim }).unwrap();
    assert_ne!(other[0], a[0]);
    let s1 = simulate_psd(&p, &baths, &cfg, &sim).unwrap();
    let s2 = simulate_psd(&p, &baths, &cfg, &sim).unwrap();
    assert_eq!(s1, s2);
    // the streaming estimator and the stored series agree
    let stored = estimate_psd_ensemble(&a, sim.psd_segments);
    for (x, y) in stored.values().iter().zip(s1.spectrum.values()) {
        assert!((x - y).abs() <= 1e-12 * x.abs());
    }
}

#[test]
fn vacuum_through_a_bare_cavity_is_flat_at_one_half() {
    let p = scaled(0.6, 0.4, 0.01);
    let segments = 400;
    let sim = SimConfig::from_segments(0.045, 4096, segments, 1, 2000, 5);
    let s = simulate_psd(&p, &BathSpec::vacuum(), &no_tones(&p), &sim)
        .unwrap()
        .spectrum;
    let v = s.values();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
    // per-bin scatter is the Welch 1/√K
    let rms = (v.iter().map(|x| (x - 0.5).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
    let expected = 0.5 / (segments as f64).sqrt();
    assert!(
        (rms / expected - 1.0).abs() < 0.2,
        "rms {rms} vs {expected}"
    );
}

#[test]
fn doubling_every_input_variance_doubles_the_spectrum() {
    let p = scaled(0.6, 0.4, 0.01);
    let b = BathSpec::thermal(0.3, 0.2, 0.0, 20.0);
    // n + 1/2 → 2n + 1
    let b2 = BathSpec::thermal(2.0 * b.n_r + 0.5, 2.0 * b.n_l + 0.5, 0.5, 2.0 * b.n_m + 0.5);
    let cfg = red(&p, 0.01);
    let sim = SimConfig::from_segments(0.04, 4096, 200, 1, 1000, 9);
    let s1 = simulate_psd(&p, &b, &cfg, &sim).unwrap().spectrum;
    let s2 = simulate_psd(&p, &b2, &cfg, &sim).unwrap().spectrum;
    for (x, y) in s1.values().iter().zip(s2.values()) {
        assert!((y / x - 2.0).abs() < 1e-9);
    }
}

#[test]
fn gates_reject_coarse_or_short_runs() {
    let p = scaled(0.6, 0.4, 0.01);
    let b = BathSpec::vacuum();
    let cfg = red(&p, 0.01);
    for sim in [
        SimConfig::from_segments(0.06, 4096, 200, 1, 0, 0),
        SimConfig::from_segments(0.04, 64, 4, 1, 0, 0),
    ] {
        assert!(matches!(
            simulate_psd(&p, &b, &cfg, &sim),
            Err(sideband_core::Error::StepSize(_))
        ));
    }
    let unstable = {
        let t = ToneSpec::from_coupling(p.omega_m() + 0.04, 0.1, ToneRole::BlueProbe).unwrap();
        ToneConfig::new(&p, vec![t], 0.04, 0.0, false).unwrap()
    };
    let sim = SimConfig::from_segments(0.04, 4096, 200, 1, 0, 0);
    assert!(matches!(
        simulate_psd(&p, &b, &unstable, &sim),
        Err(sideband_core::Error::Instability { .. })
    ));
}

/// Strong error of a coarse path against a fine one driven by the same
/// Brownian increments: z_coarse = (z_2k + z_2k+1)/√2.
fn strong_error(
    p: &SystemParams,
    b: &BathSpec,
    cfg: &ToneConfig,
    dt: f64,
    fine: &[[Complex64; 3]],
) -> f64 {
    let coarse: Vec<[Complex64; 3]> = fine
        .chunks_exact(2)
        .map(|w| [0, 1, 2].map(|i| (w[0][i] + w[1][i]) / std::f64::consts::SQRT_2))
        .collect();
    let xf = integrate_with_unit_noise(p, b, cfg, 0.5 * dt, fine).unwrap();
    let xc = integrate_with_unit_noise(p, b, cfg, dt, &coarse).unwrap();
    let mut err = 0.0f64;
    for (k, c) in xc.iter().enumerate() {
        err += (c.1 - xf[2 * k].1).norm_sqr();
    }
    (err / xc.len() as f64).sqrt()
}

#[test]
fn euler_error_halves_with_the_step() {
    let p = scaled(0.6, 0.4, 0.01);
    let b = BathSpec::thermal(0.5, 0.5, 0.0, 10.0);
    let cfg = red(&p, 0.05);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dt = 0.04;
    let n_fine = 4 * 20_000;
    let unit: Vec<[Complex64; 3]> = (0..n_fine)
        .map(|_| {
            [(); 3].map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        })
        .collect();
    // dt vs dt/2 and dt/2 vs dt/4 on the same finest increments
    let half: Vec<[Complex64; 3]> = unit
        .chunks_exact(2)
        .map(|w| [0, 1, 2].map(|i| (w[0][i] + w[1][i]) / std::f64::consts::SQRT_2))
        .collect();
    let e1 = strong_error(&p, &b, &cfg, dt, &half);
    let e2 = strong_error(&p, &b, &cfg, 0.5 * dt, &unit);
    let ratio = e1 / e2;
    assert!(
        (1.6..2.5).contains(&ratio),
        "error ratio {ratio} ({e1} vs {e2})"
    );
}

/// The five reference setups against the analytic spectra. About two minutes.
#[test]
fn canonical_configurations_match_the_analytic_spectra() {
    for c in canonical_configs(7, 1.0) {
        let r = compare(&c.params, &c.baths, &c.tones, &c.sim).unwrap();
        println!(
            "{}: floor {:+.4} segments {} peaks {:?}",
            c.name,
            r.floor_rel_err,
            r.n_segments,
            r.peaks
                .iter()
                .map(|p| (p.label.as_str(), p.rel_err, p.center_mc - p.center_analytic))
                .collect::<Vec<_>>()
        );
        assert!(r.n_segments >= 2000, "{}", c.name);
        assert!(
            r.floor_rel_err.abs() <= FLOOR_TOL,
            "{}: floor {}",
            c.name,
            r.floor_rel_err
        );
        for pk in r.peaks.iter().filter(|p| p.compared) {
            assert!(
                pk.rel_err.abs() <= WEIGHT_TOL,
                "{} {}: weight {}",
                c.name,
                pk.label,
                pk.rel_err
            );
            assert!(
                (pk.center_mc - pk.center_analytic).abs() <= pk.center_tol,
                "{} {}: center",
                c.name,
                pk.label
            );
        }
        if c.tones.red_probe().is_some() && c.tones.blue_probe().is_some() {
            let rates = multitone_rates(&c.params, &c.baths, &c.tones).unwrap();
            let model = sideband_ratio_model(rates.n_bar_m - rates.n_eff, rates.n_eff).unwrap();
            let w = |l: &str| r.peaks.iter().find(|p| p.label == l).unwrap().mc_weight;
            let ratio = w("stokes") / w("anti_stokes");
            assert!(
                (ratio / model - 1.0).abs() < 0.05,
                "{}: ratio {ratio} vs {model}",
                c.name
            );
        }
    }
}
