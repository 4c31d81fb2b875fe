//! Gamma hyperprior on the per-basis variances and the per-basis objective.
//!
//! With `alpha_l | gamma_l ~ CN(0, gamma_l)` and `gamma_l ~ Gamma(epsilon, eta)`
//! the marginal weight prior is Bessel-K. Holding every other hyperparameter
//! fixed, the log-evidence restricted to one basis is
//!
//! ```text
//! l(g) = -ln(1 + g s) + |q|^2 g / (1 + g s) + (epsilon - 1) ln g - eta g
//! ```
//!
//! whose stationary points are the positive roots of
//!
//! ```text
//! eta s^2 g^3 + (2 eta s - (epsilon - 2) s^2) g^2 + (eta + (3 - 2 epsilon) s - |q|^2) g - (epsilon - 1)
//! ```

use serde::{Deserialize, Serialize};

use super::cubic::real_roots;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PriorKind {
    BesselK,
    Rvm,
    Laplace,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    pub epsilon: f64,
    pub eta: f64,
    pub kind: PriorKind,
}

/// Rate used by the `Laplace` preset when none is given.
pub const DEFAULT_LAPLACE_ETA: f64 = 1.0;

pub fn prior_preset(kind: PriorKind) -> PriorConfig {
    match kind {
        PriorKind::BesselK => PriorConfig { epsilon: 0.5, eta: 1.0, kind },
        PriorKind::Rvm => PriorConfig { epsilon: 1.0, eta: 0.0, kind },
        PriorKind::Laplace => PriorConfig { epsilon: 1.0, eta: DEFAULT_LAPLACE_ETA, kind },
        PriorKind::Custom => PriorConfig { epsilon: 0.5, eta: 1.0, kind },
    }
}

impl PriorConfig {
    pub fn bessel_k() -> Self {
        prior_preset(PriorKind::BesselK)
    }

    pub fn rvm() -> Self {
        prior_preset(PriorKind::Rvm)
    }

    /// Exponential hyperprior (shape one) with rate `eta > 0`.
    pub fn laplace(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidConfig(format!("Laplace rate must be positive, got {eta}")));
        }
        Ok(Self { epsilon: 1.0, eta, kind: PriorKind::Laplace })
    }

    /// Arbitrary `(epsilon, eta)`. Shapes above two are rejected (the cubic may
    /// then carry three positive roots), as is `eta = 0` with `epsilon >= 2`
    /// (improper M-step).
    pub fn custom(epsilon: f64, eta: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&epsilon) || !(eta >= 0.0 && eta.is_finite()) {
            return Err(Error::InvalidConfig(format!("need 0 <= epsilon <= 2 and eta >= 0, got ({epsilon}, {eta})")));
        }
        if eta == 0.0 && epsilon >= 2.0 {
            return Err(Error::InvalidConfig("eta = 0 requires epsilon < 2".into()));
        }
        Ok(Self { epsilon, eta, kind: PriorKind::Custom })
    }

    /// Coefficients `[a, b, c, d]` of the stationary-point cubic.
    pub fn cubic_coefficients(&self, s: f64, q2: f64) -> [f64; 4] {
        let (e, n) = (self.epsilon, self.eta);
        [n * s * s, 2.0 * n * s - (e - 2.0) * s * s, n + (3.0 - 2.0 * e) * s - q2, -(e - 1.0)]
    }
}

/// Per-basis objective, additive constant dropped.
pub fn ell_gamma(gamma: f64, s: f64, q2: f64, prior: &PriorConfig) -> f64 {
    let gs = gamma * s;
    let mut v = -gs.ln_1p() + q2 * gamma / (1.0 + gs) - prior.eta * gamma;
    if prior.epsilon != 1.0 {
        v += (prior.epsilon - 1.0) * gamma.ln();
    }
    v
}

/// Positive stationary points of [`ell_gamma`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootOutcome {
    NoPositiveRoot,
    Single(f64),
    /// Two distinct positive roots; `chosen` has the larger objective.
    Pair {
        first: f64,
        second: f64,
        chosen: f64,
    },
}

impl RootOutcome {
    pub fn chosen(&self) -> Option<f64> {
        match *self {
            RootOutcome::NoPositiveRoot => None,
            RootOutcome::Single(g) => Some(g),
            RootOutcome::Pair { chosen, .. } => Some(chosen),
        }
    }
}

/// Roots closer than this (relative) are a tangency and carry no improvement.
const DOUBLE_ROOT_RTOL: f64 = 1e-12;

pub fn solve_gamma_cubic(s: f64, q2: f64, prior: &PriorConfig) -> RootOutcome {
    if !(s > 0.0) || !q2.is_finite() {
        return RootOutcome::NoPositiveRoot;
    }
    let [a, b, c, d] = prior.cubic_coefficients(s, q2);
    let pos: Vec<f64> = real_roots(a, b, c, d).into_iter().filter(|r| *r > 0.0 && r.is_finite()).collect();
    match pos.as_slice() {
        [] => RootOutcome::NoPositiveRoot,
        [g] => RootOutcome::Single(*g),
        [g1, g2, ..] => {
            debug_assert!(pos.len() == 2, "epsilon <= 2 admits at most two positive roots");
            if (g2 - g1).abs() <= DOUBLE_ROOT_RTOL * g2.abs() {
                return RootOutcome::NoPositiveRoot;
            }
            let chosen = if ell_gamma(*g1, s, q2, prior) > ell_gamma(*g2, s, q2, prior) { *g1 } else { *g2 };
            RootOutcome::Pair { first: *g1, second: *g2, chosen }
        }
    }
}
