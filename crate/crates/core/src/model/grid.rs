use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};

/// Uniform grid of candidate delays on `[0, tau_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayGrid {
    pub resolution: f64,
    pub tau_max: f64,
    taus: Vec<f64>,
}

/// Grid with spacing `ts / zeta`; `zeta * tau_max / ts` must be an integer.
pub fn build_delay_grid(ts: f64, zeta: f64, tau_max: f64) -> Result<DelayGrid> {
    if !(ts > 0.0 && zeta > 0.0 && tau_max > 0.0) {
        return Err(Error::InvalidConfig("ts, zeta and tau_max must be positive".into()));
    }
    let count = zeta * tau_max / ts;
    let rounded = count.round();
    if (count - rounded).abs() > 1e-9 * count.max(1.0) || rounded < 1.0 {
        return Err(Error::InvalidConfig(format!("zeta * tau_max / ts = {count} is not a positive integer")));
    }
    DelayGrid::with_size(tau_max, rounded as usize + 1)
}

impl DelayGrid {
    /// Grid of exactly `size` points spanning `[0, tau_max]`.
    pub fn with_size(tau_max: f64, size: usize) -> Result<Self> {
        if size < 2 || !(tau_max > 0.0) {
            return Err(Error::InvalidConfig(format!("grid needs at least two points and tau_max > 0 (got L={size})")));
        }
        let last = (size - 1) as f64;
        let taus = (0..size).map(|i| tau_max * i as f64 / last).collect();
        Ok(Self { resolution: tau_max / last, tau_max, taus })
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }
}

/// Delay-grid dictionary: `entries[(m, l)] = exp(-j 2 pi f_m tau_l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    pub entries: CMatrix,
    pub freqs: Vec<f64>,
    pub taus: Vec<f64>,
}

pub fn build_dictionary(freqs: &[f64], grid: &DelayGrid) -> Dictionary {
    Dictionary::from_delays(freqs, grid.taus())
}

impl Dictionary {
    pub fn from_delays(freqs: &[f64], taus: &[f64]) -> Self {
        let entries = CMatrix::from_fn(freqs.len(), taus.len(), |m, l| phasor(freqs[m], taus[l]));
        Self { entries, freqs: freqs.to_vec(), taus: taus.to_vec() }
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    /// `Phi * alpha` for a coefficient vector over the grid.
    pub fn synthesize(&self, alpha: &CVector) -> CVector {
        &self.entries * alpha
    }
}

pub(crate) fn phasor(f: f64, tau: f64) -> Complex64 {
    Complex64::cis(-2.0 * PI * f * tau)
}
