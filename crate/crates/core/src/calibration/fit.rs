//! Damped Gauss-Newton least squares with analytic Jacobians.
//!
//! Every fit in the calibration pipeline goes through [`gauss_newton`], so
//! results are bit-for-bit reproducible for a given input.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
// Inherent float methods exist only when std is linked somewhere in the graph.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnOptions {
    pub max_iterations: usize,
    /// Converged once the (curvature-scaled) step is this small relative to
    /// the parameters.
    pub rel_tol: f64,
}

impl Default for GnOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GnResult {
    pub params: Vec<f64>,
    /// Row-major s²(JᵀJ)⁻¹ with s² = RSS/(n − p).
    pub covariance: Vec<f64>,
    pub rss: f64,
    pub iterations: usize,
}

impl GnResult {
    pub fn sigma(&self, i: usize) -> f64 {
        let n = self.params.len();
        self.covariance[i * n + i].max(0.0).sqrt()
    }

    pub fn cov(&self, i: usize, j: usize) -> f64 {
        self.covariance[i * self.params.len() + j]
    }
}

/// In-place Cholesky factorization of a symmetric positive definite n×n
/// matrix (lower triangle). Returns false if the matrix is not SPD.
fn cholesky(a: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    true
}

fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

/// Inverse of a symmetric positive definite matrix.
pub fn spd_inverse(a: &[f64], n: usize) -> Option<Vec<f64>> {
    // Equilibrate first: parameters in a fit can differ by many decades.
    let d: Vec<f64> = (0..n).map(|i| a[i * n + i].sqrt()).collect();
    if d.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let mut l: Vec<f64> = (0..n * n).map(|k| a[k] / (d[k / n] * d[k % n])).collect();
    if !cholesky(&mut l, n) {
        return None;
    }
    let mut inv = vec![0.0; n * n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cholesky_solve(&l, n, &mut e);
        for i in 0..n {
            inv[i * n + j] = e[i] / (d[i] * d[j]);
        }
    }
    Some(inv)
}

fn normal_equations(r: &[f64], jac: &[f64], np: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = vec![0.0; np * np];
    let mut g = vec![0.0; np];
    for (k, rk) in r.iter().enumerate() {
        let row = &jac[k * np..(k + 1) * np];
        for i in 0..np {
            g[i] += row[i] * rk;
            for j in 0..=i {
                a[i * np + j] += row[i] * row[j];
            }
        }
    }
    for i in 0..np {
        for j in 0..i {
            a[j * np + i] = a[i * np + j];
        }
    }
    (a, g)
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Minimizes Σr² where `eval(params, residuals, jacobian)` fills the
/// residuals (model − data, length `n_obs`) and the row-major Jacobian
/// ∂r/∂params (`n_obs × params.len()`).
pub fn gauss_newton<F>(
    init: &[f64],
    n_obs: usize,
    mut eval: F,
    opts: &GnOptions,
) -> Result<GnResult>
where
    F: FnMut(&[f64], &mut [f64], &mut [f64]),
{
    let np = init.len();
    if n_obs < np {
        return Err(Error::DegenerateData(format!(
            "{n_obs} observations for {np} parameters"
        )));
    }
    let mut p = init.to_vec();
    let mut r = vec![0.0; n_obs];
    let mut jac = vec![0.0; n_obs * np];
    eval(&p, &mut r, &mut jac);
    let mut rss = sum_sq(&r);
    if !rss.is_finite() {
        return Err(Error::DegenerateData(
            "non-finite residuals at the initial guess".into(),
        ));
    }
    let mut mu = 1e-3;
    let mut r_try = vec![0.0; n_obs];
    let mut jac_try = vec![0.0; n_obs * np];

    for iteration in 1..=opts.max_iterations {
        let (a, g) = normal_equations(&r, &jac, np);
        let scale: Vec<f64> = (0..np).map(|i| a[i * np + i].sqrt()).collect();
        let p_norm = p
            .iter()
            .zip(&scale)
            .map(|(v, s)| (v * s) * (v * s))
            .sum::<f64>()
            .sqrt();
        loop {
            let mut m = a.clone();
            for i in 0..np {
                m[i * np + i] += mu * a[i * np + i].max(1e-300);
            }
            let mut step: Vec<f64> = g.iter().map(|v| -v).collect();
            if !cholesky(&mut m, np) {
                mu *= 10.0;
                if mu > 1e20 {
                    return Err(Error::RankDeficient("normal equations are singular".into()));
                }
                continue;
            }
            cholesky_solve(&m, np, &mut step);
            let step_norm = step
                .iter()
                .zip(&scale)
                .map(|(v, s)| (v * s) * (v * s))
                .sum::<f64>()
                .sqrt();
            let converged = step_norm <= opts.rel_tol * (p_norm + opts.rel_tol) || rss == 0.0;
            let p_try: Vec<f64> = p.iter().zip(&step).map(|(a, b)| a + b).collect();
            eval(&p_try, &mut r_try, &mut jac_try);
            let rss_try = sum_sq(&r_try);
            if rss_try.is_finite() && rss_try <= rss {
                p = p_try;
                core::mem::swap(&mut r, &mut r_try);
                core::mem::swap(&mut jac, &mut jac_try);
                rss = rss_try;
                mu = (mu * 0.1).max(1e-12);
                if converged {
                    return finish(p, &r, &jac, rss, iteration);
                }
                break;
            }
            if converged {
                // the step is already below tolerance; roundoff stopped progress
                return finish(p, &r, &jac, rss, iteration);
            }
            mu *= 10.0;
            if mu > 1e20 {
                return finish(p, &r, &jac, rss, iteration);
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
    })
}

fn finish(p: Vec<f64>, r: &[f64], jac: &[f64], rss: f64, iterations: usize) -> Result<GnResult> {
    let np = p.len();
    let (a, _) = normal_equations(r, jac, np);
    let inv = spd_inverse(&a, np)
        .ok_or_else(|| Error::RankDeficient("Jacobian has dependent columns".into()))?;
    let dof = r.len().saturating_sub(np);
    let s2 = if dof > 0 { rss / dof as f64 } else { 0.0 };
    Ok(GnResult {
        params: p,
        covariance: inv.into_iter().map(|v| v * s2).collect(),
        rss,
        iterations,
    })
}

/// Straight line y = intercept + slope·x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub intercept_sigma: f64,
    pub slope_sigma: f64,
}

/// Weighted linear regression; `sigmas` are per-point standard deviations.
/// Two points give the exact line (with zero uncertainties).
pub fn fit_line(x: &[f64], y: &[f64], sigmas: Option<&[f64]>) -> Result<LineFit> {
    if x.len() != y.len() || sigmas.is_some_and(|s| s.len() != x.len()) {
        return Err(Error::invalid("points", "length mismatch"));
    }
    if x.len() < 2 {
        return Err(Error::RankDeficient(format!(
            "{} point(s); a line needs at least 2",
            x.len()
        )));
    }
    let w = |i: usize| sigmas.map_or(1.0, |s| 1.0 / (s[i] * s[i]));
    let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        sw += w(i);
        sx += w(i) * x[i];
        sy += w(i) * y[i];
    }
    let (mx, my) = (sx / sw, sy / sw);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for i in 0..x.len() {
        sxx += w(i) * (x[i] - mx) * (x[i] - mx);
        sxy += w(i) * (x[i] - mx) * (y[i] - my);
    }
    if !(sxx > 0.0) {
        return Err(Error::RankDeficient("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // with unknown sigmas, scale by the residual variance
    let n = x.len();
    let s2 = if sigmas.is_some() {
        1.0
    } else if n > 2 {
        (0..n)
            .map(|i| (y[i] - intercept - slope * x[i]).powi(2))
            .sum::<f64>()
            / (n - 2) as f64
    } else {
        0.0
    };
    Ok(LineFit {
        intercept,
        slope,
        intercept_sigma: (s2 * (1.0 / sw + mx * mx / sxx)).sqrt(),
        slope_sigma: (s2 / sxx).sqrt(),
    })
}
