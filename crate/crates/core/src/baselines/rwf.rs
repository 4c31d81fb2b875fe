use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_with_jitter, CMatrix, CVector};
use crate::model::OfdmConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwfConfig {
    /// Support of the assumed uniform power-delay profile, seconds.
    pub tau_max: f64,
    /// Noise precision; `f64::INFINITY` for a noiseless design.
    pub lambda: f64,
}

impl RwfConfig {
    pub fn new(tau_max: f64, lambda: f64) -> Result<Self> {
        if !(tau_max > 0.0) || !tau_max.is_finite() {
            return Err(Error::InvalidConfig(format!("tau_max {tau_max} must be positive")));
        }
        if !(lambda > 0.0) {
            return Err(Error::InvalidConfig(format!("lambda {lambda} must be positive")));
        }
        Ok(Self { tau_max, lambda })
    }
}

/// Frequency correlation of a uniform delay profile on `[0, tau_max]`:
/// `(1 - exp(-j 2 pi df tau_max)) / (j 2 pi df tau_max)`.
pub fn rwf_correlation(df: f64, tau_max: f64) -> Complex64 {
    let x = 2.0 * PI * df * tau_max;
    if x == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    // sin x / x - j (1 - cos x) / x, with 1 - cos x = 2 sin^2(x/2)
    let h = (0.5 * x).sin();
    Complex64::new(x.sin() / x, -2.0 * h * h / x)
}

/// Precomputed `R_fp (R_pp + I / lambda)^-1`, reusable across observations.
#[derive(Debug, Clone)]
pub struct RwfFilter {
    weights: CMatrix,
}

impl RwfFilter {
    pub fn new(ofdm: &OfdmConfig, cfg: &RwfConfig) -> Result<Self> {
        RwfConfig::new(cfg.tau_max, cfg.lambda)?;
        let freqs = ofdm.freqs();
        let pf = ofdm.pilot_freqs();
        let m = pf.len();
        let noise = if cfg.lambda.is_finite() { 1.0 / cfg.lambda } else { 0.0 };
        let rpp = CMatrix::from_fn(m, m, |i, j| {
            rwf_correlation(pf[i] - pf[j], cfg.tau_max) + if i == j { noise } else { 0.0 }
        });
        let rfp = CMatrix::from_fn(freqs.len(), m, |n, j| rwf_correlation(freqs[n] - pf[j], cfg.tau_max));
        let chol = cholesky_with_jitter(rpp)?;
        // W = R_fp A^-1  <=>  A W^H = R_fp^H  (A Hermitian)
        let weights = chol.solve(&rfp.adjoint()).adjoint();
        Ok(Self { weights })
    }

    pub fn apply(&self, y: &CVector) -> Result<CVector> {
        if y.len() != self.weights.ncols() {
            return Err(Error::Dimension(format!("filter expects {} pilots, got {}", self.weights.ncols(), y.len())));
        }
        Ok(&self.weights * y)
    }
}

/// Full-band channel estimate from the pilot observations.
pub fn rwf_estimate(y: &CVector, ofdm: &OfdmConfig, cfg: &RwfConfig) -> Result<CVector> {
    RwfFilter::new(ofdm, cfg)?.apply(y)
}
