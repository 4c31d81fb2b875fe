use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{least_squares, select_columns, CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoConfig {
    pub rho: f64,
    pub max_iter: usize,
    /// Relative objective change.
    pub tol: f64,
    /// Least-squares refit on the selected support.
    pub debias: bool,
}

impl LassoConfig {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidConfig(format!("rho {rho} must be positive")));
        }
        Ok(Self { rho, max_iter: 5000, tol: 1e-8, debias: true })
    }
}

/// `5 sqrt(ln L / lambda)`.
pub fn rho_from_precision(l: usize, lambda: f64) -> f64 {
    5.0 * ((l as f64).ln() / lambda).sqrt()
}

/// Proximal map of `t |z|`: shrinks the modulus, keeps the phase.
pub fn soft_threshold(z: Complex64, t: f64) -> Complex64 {
    let a = z.norm();
    if a <= t {
        Complex64::new(0.0, 0.0)
    } else {
        z * ((a - t) / a)
    }
}

/// `||y - Phi alpha||^2 + 2 rho ||alpha||_1`.
pub fn lasso_objective(y: &CVector, phi: &CMatrix, alpha: &CVector, rho: f64) -> f64 {
    (y - phi * alpha).norm_squared() + 2.0 * rho * alpha.iter().map(|a| a.norm()).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoResult {
    /// Debiased estimate when the config asks for it, else the shrunk one.
    pub alpha_hat: CVector,
    /// Minimizer before any refit.
    pub alpha_shrunk: CVector,
    pub iterations: usize,
    pub converged: bool,
}

fn spectral_norm_sqr(phi: &CMatrix) -> f64 {
    let l = phi.ncols();
    let mut v = CVector::from_fn(l, |i, _| Complex64::new(1.0 + (i % 7) as f64 * 0.1, 0.3));
    let mut est = 0.0;
    for _ in 0..50 {
        let w = phi.ad_mul(&(phi * &v));
        let n = w.norm();
        if n == 0.0 {
            return 0.0;
        }
        est = n / v.norm();
        v = w / Complex64::from(n);
    }
    est
}

/// Monotone FISTA with backtracking on `||y - Phi alpha||^2 + 2 rho ||alpha||_1`.
pub fn lasso_solve(y: &CVector, phi: &CMatrix, cfg: &LassoConfig) -> Result<LassoResult> {
    let (m, l) = phi.shape();
    if y.len() != m {
        return Err(Error::Dimension(format!("dictionary has {m} rows, observation has {}", y.len())));
    }
    LassoConfig::new(cfg.rho)?;
    let rho = cfg.rho;
    let f = |a: &CVector| (y - phi * a).norm_squared();
    let grad = |a: &CVector| phi.ad_mul(&(phi * a - y)) * Complex64::from(2.0);
    let penalty = |a: &CVector| 2.0 * rho * a.iter().map(|v| v.norm()).sum::<f64>();

    // Lipschitz constant of the smooth part, slightly inflated; backtracking covers the rest
    let mut lip = (2.0 * spectral_norm_sqr(phi) * 1.01).max(1e-12);
    let mut x = CVector::zeros(l);
    let mut obj = f(&x);
    let mut z = x.clone();
    let mut t = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let fz = f(&z);
        let gz = grad(&z);
        let cand = loop {
            let step = 1.0 / lip;
            let c = CVector::from_fn(l, |i, _| soft_threshold(z[i] - gz[i] * step, 2.0 * rho * step));
            let d = &c - &z;
            let quad = fz + gz.dotc(&d).re + 0.5 * lip * d.norm_squared();
            if f(&c) <= quad * (1.0 + 1e-12) + 1e-300 {
                break c;
            }
            lip *= 2.0;
        };
        let cand_obj = f(&cand) + penalty(&cand);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let (x_next, obj_next) = if cand_obj <= obj { (cand.clone(), cand_obj) } else { (x.clone(), obj) };
        z = &x_next
            + (&cand - &x_next) * Complex64::from(t / t_next)
            + (&x_next - &x) * Complex64::from((t - 1.0) / t_next);
        let change = (obj - obj_next).abs() / obj.abs().max(f64::MIN_POSITIVE);
        let moved = cand_obj <= obj;
        x = x_next;
        obj = obj_next;
        t = t_next;
        // a rejected candidate leaves x in place; that is not convergence
        if moved && change < cfg.tol {
            converged = true;
            break;
        }
    }

    let alpha_hat = if cfg.debias { debias(y, phi, &x) } else { x.clone() };
    Ok(LassoResult { alpha_hat, alpha_shrunk: x, iterations, converged })
}

fn debias(y: &CVector, phi: &CMatrix, x: &CVector) -> CVector {
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i].norm() > 0.0).collect();
    if support.is_empty() {
        return x.clone();
    }
    match least_squares(&select_columns(phi, &support), y) {
        Some(c) => {
            let mut out = CVector::zeros(x.len());
            for (k, &i) in support.iter().enumerate() {
                out[i] = c[k];
            }
            out
        }
        None => {
            log::warn!("lasso: support of {} columns is rank deficient, keeping shrunk estimate", support.len());
            x.clone()
        }
    }
}
