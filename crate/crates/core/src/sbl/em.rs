//! Batch EM over the full dictionary. O(L^3) per iteration; this is the
//! reference the greedy engine is checked against, not a production path.

use super::prior::PriorConfig;
use super::{clamp_lambda, initial_lambda, SblOptions};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_with_jitter, CMatrix, CVector};

#[derive(Debug, Clone, PartialEq)]
pub struct EmOptions {
    pub base: SblOptions,
    /// Lower bound on every `gamma_l`; keeps the prior precision finite.
    pub gamma_floor: f64,
    /// Warm start; defaults to a flat data-scaled initialization.
    pub initial_gamma: Option<Vec<f64>>,
}

impl EmOptions {
    pub fn new(prior: PriorConfig) -> Self {
        Self { base: SblOptions::em(prior), gamma_floor: 1e-12, initial_gamma: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmState {
    pub gamma: Vec<f64>,
    pub lambda: f64,
    pub mu: CVector,
    pub sigma: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmResult {
    pub state: EmState,
    /// `{l : gamma_l > 1e-8 max gamma}`.
    pub support: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    /// Log-evidence plus log-hyperprior at each iterate, constants dropped.
    pub objective_trace: Vec<f64>,
}

impl EmResult {
    pub fn alpha_hat(&self) -> CVector {
        let mut a = CVector::zeros(self.state.mu.len());
        for &l in &self.support {
            a[l] = self.state.mu[l];
        }
        a
    }
}

struct Posterior {
    sigma: CMatrix,
    mu: CVector,
    /// `ln det(I + lambda G Phi^H Phi G)`.
    logdet_b: f64,
}

fn posterior(y: &CVector, phi: &CMatrix, gamma: &[f64], lambda: f64) -> Result<Posterior> {
    let l = phi.ncols();
    if gamma.len() != l || phi.nrows() != y.len() {
        return Err(Error::Dimension("gamma / dictionary / observation sizes disagree".into()));
    }
    if gamma.iter().any(|g| !(*g > 0.0)) || !(lambda > 0.0) {
        return Err(Error::InvalidConfig("gamma and lambda must be positive".into()));
    }
    let g: Vec<f64> = gamma.iter().map(|v| v.sqrt()).collect();
    let gram = phi.ad_mul(phi);
    let b = CMatrix::from_fn(l, l, |i, j| gram[(i, j)] * (lambda * g[i] * g[j]) + if i == j { 1.0 } else { 0.0 });
    let chol = cholesky_with_jitter(b)?;
    let logdet_b = 2.0 * chol.l().diagonal().iter().map(|d| d.re.ln()).sum::<f64>();
    let mut rhs = phi.ad_mul(y);
    for (v, gi) in rhs.iter_mut().zip(&g) {
        *v *= lambda * gi;
    }
    let mut mu = chol.solve(&rhs);
    for (v, gi) in mu.iter_mut().zip(&g) {
        *v *= gi;
    }
    let binv = chol.inverse();
    let sigma = CMatrix::from_fn(l, l, |i, j| binv[(i, j)] * (g[i] * g[j]));
    Ok(Posterior { sigma, mu, logdet_b })
}

/// Gaussian posterior of the weights for fixed `(gamma, lambda)`.
pub fn em_posterior(y: &CVector, phi: &CMatrix, gamma: &[f64], lambda: f64) -> Result<(CMatrix, CVector)> {
    let p = posterior(y, phi, gamma, lambda)?;
    Ok((p.sigma, p.mu))
}

/// M-step for one variance given `<|alpha_l|^2> = |mu_l|^2 + Sigma_ll`.
pub fn em_gamma_update(alpha2_mean: f64, prior: &PriorConfig) -> f64 {
    let (e, n) = (prior.epsilon, prior.eta);
    if n == 0.0 {
        return alpha2_mean / (2.0 - e);
    }
    let b = e - 2.0;
    let disc = (b * b + 4.0 * n * alpha2_mean).sqrt();
    if b < 0.0 {
        // (b + disc) / 2n loses everything to cancellation when 4 n a << b^2
        2.0 * alpha2_mean / (disc - b)
    } else {
        (b + disc) / (2.0 * n)
    }
}

/// `M / <||y - Phi alpha||^2>` over the full dictionary.
pub fn em_lambda_update(y: &CVector, phi: &CMatrix, sigma: &CMatrix, mu: &CVector) -> f64 {
    let m = y.len() as f64;
    let resid = (y - phi * mu).norm_squared();
    let gram = phi.ad_mul(phi);
    let trace: f64 = sigma.iter().zip(gram.transpose().iter()).map(|(s, g)| (s * g).re).sum();
    clamp_lambda(m / (resid + trace))
}

fn objective(y: &CVector, phi: &CMatrix, post: &Posterior, gamma: &[f64], lambda: f64, prior: &PriorConfig) -> f64 {
    let m = y.len() as f64;
    // ln|C| = -M ln lambda + ln|B|,  y^H C^-1 y = lambda |y - Phi mu|^2 + mu^H G^-2 mu
    let logdet_c = -m * lambda.ln() + post.logdet_b;
    let quad = lambda * (y - phi * &post.mu).norm_squared()
        + post.mu.iter().zip(gamma).map(|(v, g)| v.norm_sqr() / g).sum::<f64>();
    let hyper: f64 = gamma.iter().map(|&g| (prior.epsilon - 1.0) * g.ln() - prior.eta * g).sum();
    -m * std::f64::consts::PI.ln() - logdet_c - quad + hyper
}

/// Log-evidence plus log-hyperprior at `(gamma, lambda)`, constants dropped.
pub fn em_objective(y: &CVector, phi: &CMatrix, gamma: &[f64], lambda: f64, prior: &PriorConfig) -> Result<f64> {
    let post = posterior(y, phi, gamma, lambda)?;
    Ok(objective(y, phi, &post, gamma, lambda, prior))
}

pub fn run_em(y: &CVector, phi: &CMatrix, opts: &EmOptions) -> Result<EmResult> {
    let l = phi.ncols();
    let prior = &opts.base.prior;
    let floor = opts.gamma_floor;
    let mut lambda = match opts.base.fixed_lambda {
        Some(v) => v,
        None => initial_lambda(y),
    };
    let mut gamma = match &opts.initial_gamma {
        Some(g) if g.len() == l => g.iter().map(|v| v.max(floor)).collect(),
        Some(_) => return Err(Error::Dimension("initial gamma length".into())),
        None => {
            let col_power: f64 = (0..l).map(|j| phi.column(j).norm_squared()).sum();
            vec![(y.norm_squared() / col_power.max(f64::MIN_POSITIVE)).max(floor); l]
        }
    };
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut post = posterior(y, phi, &gamma, lambda)?;
    trace.push(objective(y, phi, &post, &gamma, lambda, prior));
    while iterations < opts.base.max_iter {
        iterations += 1;
        let new_gamma: Vec<f64> = (0..l)
            .map(|j| {
                let a2 = post.mu[j].norm_sqr() + post.sigma[(j, j)].re;
                em_gamma_update(a2, prior).max(floor)
            })
            .collect();
        if opts.base.fixed_lambda.is_none() {
            lambda = em_lambda_update(y, phi, &post.sigma, &post.mu);
        }
        let change = gamma.iter().zip(&new_gamma).map(|(o, n)| (n - o).abs() / o).fold(0.0, f64::max);
        gamma = new_gamma;
        post = posterior(y, phi, &gamma, lambda)?;
        trace.push(objective(y, phi, &post, &gamma, lambda, prior));
        if change < opts.base.tol {
            converged = true;
            break;
        }
    }
    let gmax = gamma.iter().copied().fold(0.0, f64::max);
    let support = (0..l).filter(|&j| gamma[j] > 1e-8 * gmax).collect();
    Ok(EmResult {
        state: EmState { gamma, lambda, mu: post.mu, sigma: post.sigma },
        support,
        iterations,
        converged,
        objective_trace: trace,
    })
}
