//! Sparse Bayesian learning over a fixed dictionary.
//!
//! [`fast`] is the greedy marginal-likelihood engine (one basis added, deleted
//! or re-estimated per iteration, rank-one posterior updates). [`em`] is the
//! batch EM reference over the whole dictionary, used as its oracle.

mod cubic;
pub mod em;
pub mod fast;
mod prior;

pub use cubic::real_roots;
pub use prior::{ell_gamma, prior_preset, solve_gamma_cubic, PriorConfig, PriorKind, RootOutcome, DEFAULT_LAPLACE_ETA};

use crate::linalg::CVector;

/// Options shared by the fast engine and the EM reference.
#[derive(Debug, Clone, PartialEq)]
pub struct SblOptions {
    pub prior: PriorConfig,
    /// Fast engine: relative threshold on the best objective increase.
    /// EM: threshold on the largest relative change of any `gamma_l`.
    pub tol: f64,
    pub max_iter: usize,
    /// Re-estimate the noise precision every this many iterations (0 = never).
    pub lambda_refresh_period: usize,
    /// Use this noise precision throughout instead of estimating it.
    pub fixed_lambda: Option<f64>,
    /// Keep the posterior mean after every iteration.
    pub record_snapshots: bool,
}

impl SblOptions {
    pub fn fast(prior: PriorConfig) -> Self {
        Self { prior, tol: 1e-8, max_iter: 1000, lambda_refresh_period: 3, fixed_lambda: None, record_snapshots: false }
    }

    pub fn em(prior: PriorConfig) -> Self {
        Self { tol: 1e-6, max_iter: 5000, lambda_refresh_period: 1, ..Self::fast(prior) }
    }

    pub fn with_fixed_lambda(mut self, lambda: f64) -> Self {
        self.fixed_lambda = Some(lambda);
        self
    }
}

pub const LAMBDA_MIN: f64 = 1e-12;
pub const LAMBDA_MAX: f64 = 1e12;

pub(crate) fn clamp_lambda(lambda: f64) -> f64 {
    if lambda.is_nan() {
        return LAMBDA_MAX;
    }
    if lambda > LAMBDA_MAX {
        log::warn!("noise precision {lambda:.3e} clamped to {LAMBDA_MAX:.0e}");
    }
    lambda.clamp(LAMBDA_MIN, LAMBDA_MAX)
}

/// `100 / Var(y)` with the unbiased sample variance.
pub(crate) fn initial_lambda(y: &CVector) -> f64 {
    let m = y.len();
    if m < 2 {
        return clamp_lambda(100.0 / y.norm_squared());
    }
    let mean = y.mean();
    let var = y.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (m - 1) as f64;
    clamp_lambda(100.0 / var)
}
