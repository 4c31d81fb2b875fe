//! Greedy marginal-likelihood maximization with rank-one posterior updates.
//!
//! The model holds an active set `A` of dictionary columns with variances
//! `gamma_l`. For every basis we keep
//!
//! ```text
//! S_l = lambda |phi_l|^2 - lambda^2 phi_l^H Phi_A Sigma Phi_A^H phi_l
//! Q_l = lambda phi_l^H (y - Phi_A mu)
//! ```
//!
//! from which the leave-one-out statistics are `s_l = S_l / (1 - gamma_l S_l)`
//! and `q_l = Q_l / (1 - gamma_l S_l)` for active bases (and `S_l`, `Q_l`
//! otherwise). Each iteration scores an add / delete / re-estimate action for
//! every basis, applies the best one in O(LM), and every few iterations
//! refreshes the noise precision followed by a batch rebuild.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::prior::{ell_gamma, solve_gamma_cubic, PriorConfig, RootOutcome};
use super::{clamp_lambda, initial_lambda, SblOptions};
use crate::error::{Error, Result};
use crate::linalg::{cholesky_with_jitter, select_columns, CMatrix, CVector};

const DEGENERACY_TOL: f64 = 1e-12;

/// Posterior and candidate statistics of the greedy engine.
#[derive(Debug, Clone, PartialEq)]
pub struct SblState {
    /// Active dictionary columns, in insertion order.
    pub active: Vec<usize>,
    /// Variance of each active column, aligned with `active`.
    pub gamma: Vec<f64>,
    pub mu: CVector,
    pub sigma: CMatrix,
    pub s_cap: Vec<f64>,
    pub q_cap: Vec<Complex64>,
    pub lambda: f64,
    pub iter: usize,
    pub ell_trace: Vec<f64>,
    position: Vec<Option<usize>>,
}

impl SblState {
    /// Empty model: `C = I / lambda`.
    pub fn empty(phi: &CMatrix, y: &CVector, lambda: f64) -> Self {
        let l = phi.ncols();
        let phy = phi.ad_mul(y);
        Self {
            active: Vec::new(),
            gamma: Vec::new(),
            mu: CVector::zeros(0),
            sigma: CMatrix::zeros(0, 0),
            s_cap: (0..l).map(|j| lambda * phi.column(j).norm_squared()).collect(),
            q_cap: phy.iter().map(|v| v * lambda).collect(),
            lambda,
            iter: 0,
            ell_trace: Vec::new(),
            position: vec![None; l],
        }
    }

    /// Consistent state for the given active set, computed from scratch.
    pub fn from_active(phi: &CMatrix, y: &CVector, active: Vec<usize>, gamma: Vec<f64>, lambda: f64) -> Result<Self> {
        let mut st = Self::empty(phi, y, lambda);
        if active.len() != gamma.len() {
            return Err(Error::Dimension("active set and gamma lengths differ".into()));
        }
        for (j, &l) in active.iter().enumerate() {
            if l >= phi.ncols() || st.position[l].is_some() {
                return Err(Error::InvalidConfig(format!("bad active index {l}")));
            }
            st.position[l] = Some(j);
        }
        st.active = active;
        st.gamma = gamma;
        st.rebuild(phi, y)?;
        Ok(st)
    }

    pub fn n_bases(&self) -> usize {
        self.position.len()
    }

    pub fn position(&self, l: usize) -> Option<usize> {
        self.position[l]
    }

    pub fn gamma_of(&self, l: usize) -> Option<f64> {
        self.position[l].map(|j| self.gamma[j])
    }

    /// Batch recomputation of `Sigma`, `mu`, `S`, `Q` from `(A, gamma, lambda)`.
    pub fn rebuild(&mut self, phi: &CMatrix, y: &CVector) -> Result<()> {
        let (sigma, mu) = posterior_batch(phi, y, &self.active, &self.gamma, self.lambda)?;
        self.sigma = sigma;
        self.mu = mu;
        let (s, q) = compute_sq_batch(y, phi, self);
        self.s_cap = s;
        self.q_cap = q;
        Ok(())
    }

    /// Posterior mean scattered onto the full grid.
    pub fn alpha_full(&self) -> CVector {
        let mut a = CVector::zeros(self.n_bases());
        for (j, &l) in self.active.iter().enumerate() {
            a[l] = self.mu[j];
        }
        a
    }

    fn reindex(&mut self) {
        self.position.iter_mut().for_each(|p| *p = None);
        for (j, &l) in self.active.iter().enumerate() {
            self.position[l] = Some(j);
        }
    }
}

/// `Sigma = (lambda Phi_A^H Phi_A + Gamma^-1)^-1`, `mu = lambda Sigma Phi_A^H y`,
/// evaluated as `G (I + lambda G Phi_A^H Phi_A G)^-1 G` with `G = Gamma^(1/2)`.
pub fn posterior_batch(
    phi: &CMatrix,
    y: &CVector,
    active: &[usize],
    gamma: &[f64],
    lambda: f64,
) -> Result<(CMatrix, CVector)> {
    let k = active.len();
    if k == 0 {
        return Ok((CMatrix::zeros(0, 0), CVector::zeros(0)));
    }
    if gamma.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::InvalidConfig("active variances must be positive".into()));
    }
    let pa = select_columns(phi, active);
    let g: Vec<f64> = gamma.iter().map(|v| v.sqrt()).collect();
    let gram = pa.ad_mul(&pa);
    let b = CMatrix::from_fn(k, k, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        gram[(i, j)] * (lambda * g[i] * g[j]) + delta
    });
    let binv = cholesky_with_jitter(b)?.inverse();
    let sigma = CMatrix::from_fn(k, k, |i, j| binv[(i, j)] * (g[i] * g[j]));
    let mu = &sigma * pa.ad_mul(y) * Complex64::from(lambda);
    Ok((sigma, mu))
}

/// Capital statistics `S_l`, `Q_l` for every basis from the state's posterior.
pub fn compute_sq_batch(y: &CVector, phi: &CMatrix, state: &SblState) -> (Vec<f64>, Vec<Complex64>) {
    let lambda = state.lambda;
    let l = phi.ncols();
    let resid = y - active_combination(phi, &state.active, &state.mu);
    let q: Vec<Complex64> = phi.ad_mul(&resid).iter().map(|v| v * lambda).collect();
    let mut s: Vec<f64> = (0..l).map(|j| lambda * phi.column(j).norm_squared()).collect();
    if !state.active.is_empty() {
        let pa = select_columns(phi, &state.active);
        let p = pa.ad_mul(phi); // |A| x L
        let sp = &state.sigma * &p;
        for j in 0..l {
            let quad: f64 = p.column(j).dotc(&sp.column(j)).re;
            s[j] -= lambda * lambda * quad;
        }
    }
    (s, q)
}

/// Leave-one-out `(s_l, q_l)`.
pub fn sparsity_quality(state: &SblState, l: usize) -> Result<(f64, Complex64)> {
    let (s, q) = (state.s_cap[l], state.q_cap[l]);
    match state.gamma_of(l) {
        None => Ok((s, q)),
        Some(g) => {
            let denom = 1.0 - g * s;
            if denom <= DEGENERACY_TOL {
                return Err(Error::Degenerate { index: l });
            }
            Ok((s / denom, q / denom))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionKind {
    Add,
    Delete,
    Reestimate,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub kind: ActionKind,
    pub index: usize,
    /// Candidate variance; zero for deletions and no-ops.
    pub gamma: f64,
    pub delta_ell: f64,
}

/// Scores the best move for basis `l`. An inactive basis contributes zero to
/// the objective, so additions are scored against 0 and deletions from it.
pub fn propose_action(state: &SblState, l: usize, prior: &PriorConfig) -> Result<Action> {
    let (s, q) = sparsity_quality(state, l)?;
    let q2 = q.norm_sqr();
    let root = solve_gamma_cubic(s, q2, prior);
    let current = state.gamma_of(l);
    let action = match (root.chosen(), current) {
        (Some(g), None) => Action { kind: ActionKind::Add, index: l, gamma: g, delta_ell: ell_gamma(g, s, q2, prior) },
        (Some(g), Some(cur)) => Action {
            kind: ActionKind::Reestimate,
            index: l,
            gamma: g,
            delta_ell: ell_gamma(g, s, q2, prior) - ell_gamma(cur, s, q2, prior),
        },
        (None, Some(cur)) => {
            Action { kind: ActionKind::Delete, index: l, gamma: 0.0, delta_ell: -ell_gamma(cur, s, q2, prior) }
        }
        (None, None) => Action { kind: ActionKind::None, index: l, gamma: 0.0, delta_ell: 0.0 },
    };
    debug_assert!(!matches!(root, RootOutcome::Pair { .. }) || action.gamma > 0.0);
    Ok(action)
}

fn active_combination(phi: &CMatrix, active: &[usize], x: &CVector) -> CVector {
    let mut out = CVector::zeros(phi.nrows());
    for (j, &l) in active.iter().enumerate() {
        out.axpy(x[j], &phi.column(l), Complex64::from(1.0));
    }
    out
}

/// Applies `action` with rank-one updates of `Sigma`, `mu`, `S`, `Q`.
///
/// On [`Error::StateCorruption`] the state is left untouched.
pub fn apply_action(state: &mut SblState, action: &Action, phi: &CMatrix, _y: &CVector) -> Result<()> {
    let lambda = state.lambda;
    let i = action.index;
    match action.kind {
        ActionKind::None => Ok(()),
        ActionKind::Add => {
            if state.position[i].is_some() {
                return Err(Error::InvalidConfig(format!("basis {i} is already active")));
            }
            if !(action.gamma > 0.0) {
                return Err(Error::InvalidConfig("added variance must be positive".into()));
            }
            let denom = 1.0 / action.gamma + state.s_cap[i];
            if !(denom > 0.0) {
                return Err(Error::StateCorruption(format!("add {i}: 1/gamma + S = {denom:.3e}")));
            }
            let sii = 1.0 / denom;
            let mu_i = state.q_cap[i] * sii;
            let k = state.active.len();
            let phi_i = phi.column(i);
            let p = DVector::from_iterator(k, state.active.iter().map(|&a| phi.column(a).dotc(&phi_i)));
            let w = &state.sigma * p * Complex64::from(lambda);
            let e = phi_i - active_combination(phi, &state.active, &w);
            let z = phi.ad_mul(&e);

            let mut sigma = CMatrix::zeros(k + 1, k + 1);
            for r in 0..k {
                for c in 0..k {
                    sigma[(r, c)] = state.sigma[(r, c)] + w[r] * w[c].conj() * sii;
                }
                sigma[(r, k)] = -w[r] * sii;
                sigma[(k, r)] = -w[r].conj() * sii;
            }
            sigma[(k, k)] = Complex64::from(sii);
            let mut mu = CVector::zeros(k + 1);
            for r in 0..k {
                mu[r] = state.mu[r] - w[r] * mu_i;
            }
            mu[k] = mu_i;

            for (l, zl) in z.iter().enumerate() {
                let zl = zl * lambda;
                state.s_cap[l] -= sii * zl.norm_sqr();
                state.q_cap[l] -= mu_i * zl;
            }
            state.sigma = sigma;
            state.mu = mu;
            state.active.push(i);
            state.gamma.push(action.gamma);
            state.position[i] = Some(k);
            Ok(())
        }
        ActionKind::Reestimate => {
            let j = state.position[i].ok_or_else(|| Error::InvalidConfig(format!("basis {i} is not active")))?;
            if !(action.gamma > 0.0) {
                return Err(Error::InvalidConfig("re-estimated variance must be positive".into()));
            }
            let d_alpha = 1.0 / action.gamma - 1.0 / state.gamma[j];
            if d_alpha == 0.0 {
                return Ok(());
            }
            let sjj = state.sigma[(j, j)].re;
            let kappa = 1.0 / (sjj + 1.0 / d_alpha);
            let new_sjj = sjj - kappa * sjj * sjj;
            if !(new_sjj > 0.0) || !kappa.is_finite() {
                return Err(Error::StateCorruption(format!("reestimate {i}: Sigma_jj -> {new_sjj:.3e}")));
            }
            let col = state.sigma.column(j).into_owned();
            let mu_j = state.mu[j];
            let z = phi.ad_mul(&active_combination(phi, &state.active, &col));
            for (l, zl) in z.iter().enumerate() {
                let zl = zl * lambda;
                state.s_cap[l] += kappa * zl.norm_sqr();
                state.q_cap[l] += mu_j * zl * kappa;
            }
            state.sigma -= &col * col.adjoint() * Complex64::from(kappa);
            state.mu -= &col * (mu_j * kappa);
            state.gamma[j] = action.gamma;
            Ok(())
        }
        ActionKind::Delete => {
            let j = state.position[i].ok_or_else(|| Error::InvalidConfig(format!("basis {i} is not active")))?;
            let sjj = state.sigma[(j, j)].re;
            if !(sjj > 0.0) {
                return Err(Error::StateCorruption(format!("delete {i}: Sigma_jj = {sjj:.3e}")));
            }
            let col = state.sigma.column(j).into_owned();
            let mu_j = state.mu[j];
            let z = phi.ad_mul(&active_combination(phi, &state.active, &col));
            for (l, zl) in z.iter().enumerate() {
                let zl = zl * lambda;
                state.s_cap[l] += zl.norm_sqr() / sjj;
                state.q_cap[l] += mu_j * zl / sjj;
            }
            let sigma = &state.sigma - &col * col.adjoint() / Complex64::from(sjj);
            let mu = &state.mu - &col * (mu_j / sjj);
            state.sigma = sigma.remove_row(j).remove_column(j);
            state.mu = mu.remove_row(j);
            state.active.remove(j);
            state.gamma.remove(j);
            state.reindex();
            Ok(())
        }
    }
}

/// Structural change without bookkeeping; the caller rebuilds afterwards.
fn apply_structural(state: &mut SblState, action: &Action) {
    match action.kind {
        ActionKind::Add => {
            state.active.push(action.index);
            state.gamma.push(action.gamma);
        }
        ActionKind::Reestimate => {
            if let Some(j) = state.position[action.index] {
                state.gamma[j] = action.gamma;
            }
        }
        ActionKind::Delete => {
            if let Some(j) = state.position[action.index] {
                state.active.remove(j);
                state.gamma.remove(j);
            }
        }
        ActionKind::None => {}
    }
    state.reindex();
}

/// `M / (||y - Phi_A mu||^2 + tr(Phi_A Sigma Phi_A^H))`, clamped.
pub fn update_lambda(state: &SblState, y: &CVector, phi: &CMatrix) -> f64 {
    let m = y.len() as f64;
    let resid = (y - active_combination(phi, &state.active, &state.mu)).norm_squared();
    let mut trace = 0.0;
    if !state.active.is_empty() {
        let pa = select_columns(phi, &state.active);
        let gram = pa.ad_mul(&pa);
        trace = state.sigma.iter().zip(gram.transpose().iter()).map(|(s, g)| (s * g).re).sum();
    }
    let expected = resid + trace;
    if expected <= 0.0 {
        log::warn!("zero expected residual power, clamping noise precision");
    }
    clamp_lambda(m / expected)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionCounts {
    pub adds: usize,
    pub deletes: usize,
    pub reestimates: usize,
}

impl ActionCounts {
    fn record(&mut self, kind: ActionKind) {
        match kind {
            ActionKind::Add => self.adds += 1,
            ActionKind::Delete => self.deletes += 1,
            ActionKind::Reestimate => self.reestimates += 1,
            ActionKind::None => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub kind: ActionKind,
    pub index: usize,
    pub delta_ell: f64,
    pub active_size: usize,
    pub lambda: f64,
    pub lambda_refreshed: bool,
    /// Sparse posterior mean after the iteration, when snapshots are enabled.
    pub snapshot: Option<Vec<(usize, Complex64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SblResult {
    /// Posterior mean over the whole grid; nonzero only on `support`.
    pub alpha_hat: CVector,
    pub support: Vec<usize>,
    pub gamma_hat: Vec<f64>,
    pub lambda_hat: f64,
    /// Applied actions, excluding the initial insertion.
    pub iterations: usize,
    pub converged: bool,
    pub counts: ActionCounts,
    pub diagnostics: Vec<IterationRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Applied(Action),
    Converged,
    IterationLimit,
}

/// Step-wise driver around [`SblState`].
pub struct FastSbl<'a> {
    phi: &'a CMatrix,
    y: &'a CVector,
    opts: SblOptions,
    state: SblState,
    counts: ActionCounts,
    ell_total: f64,
    converged: bool,
    diagnostics: Vec<IterationRecord>,
}

impl<'a> FastSbl<'a> {
    /// Sets the initial noise precision and inserts the first basis.
    pub fn new(phi: &'a CMatrix, y: &'a CVector, opts: SblOptions) -> Result<Self> {
        if phi.nrows() != y.len() {
            return Err(Error::Dimension(format!("dictionary has {} rows, observation has {}", phi.nrows(), y.len())));
        }
        if phi.ncols() == 0 {
            return Err(Error::Dimension("empty dictionary".into()));
        }
        let lambda = match opts.fixed_lambda {
            Some(l) if l > 0.0 => l,
            Some(l) => return Err(Error::InvalidConfig(format!("fixed lambda {l} must be positive"))),
            None => initial_lambda(y),
        };
        let mut engine = Self {
            phi,
            y,
            state: SblState::empty(phi, y, lambda),
            opts,
            counts: ActionCounts::default(),
            ell_total: 0.0,
            converged: false,
            diagnostics: Vec::new(),
        };
        engine.insert_first()?;
        Ok(engine)
    }

    fn insert_first(&mut self) -> Result<()> {
        let phy = self.phi.ad_mul(self.y);
        let mut order: Vec<(usize, f64)> = (0..self.phi.ncols())
            .map(|l| {
                let n2 = self.phi.column(l).norm_squared();
                (l, if n2 > 0.0 { phy[l].norm_sqr() / n2 } else { 0.0 })
            })
            .collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for (l, _) in order {
            let action = propose_action(&self.state, l, &self.opts.prior)?;
            if action.kind == ActionKind::Add {
                self.apply(&action)?;
                self.ell_total = action.delta_ell;
                self.counts.record(ActionKind::Add);
                return Ok(());
            }
        }
        self.converged = true;
        Ok(())
    }

    fn apply(&mut self, action: &Action) -> Result<()> {
        match apply_action(&mut self.state, action, self.phi, self.y) {
            Err(Error::StateCorruption(msg)) => {
                log::warn!("rank-one update failed ({msg}); rebuilding posterior");
                apply_structural(&mut self.state, action);
                self.state.rebuild(self.phi, self.y)
            }
            other => other,
        }
    }

    pub fn state(&self) -> &SblState {
        &self.state
    }

    pub fn is_converged(&self) -> bool {
        self.converged
    }

    /// Best action over all bases; ties go to the lowest index.
    pub fn best_action(&self) -> Result<Option<Action>> {
        let mut best: Option<Action> = None;
        for l in 0..self.phi.ncols() {
            let a = match propose_action(&self.state, l, &self.opts.prior) {
                Ok(a) => a,
                Err(Error::Degenerate { .. }) => continue,
                Err(e) => return Err(e),
            };
            if best.is_none_or(|b| a.delta_ell > b.delta_ell) {
                best = Some(a);
            }
        }
        Ok(best)
    }

    pub fn step(&mut self) -> Result<StepOutcome> {
        if self.converged {
            return Ok(StepOutcome::Converged);
        }
        if self.state.iter >= self.opts.max_iter {
            return Ok(StepOutcome::IterationLimit);
        }
        let threshold = self.opts.tol * self.ell_total.abs().max(1.0);
        let action = match self.best_action()? {
            Some(a) if a.kind != ActionKind::None && a.delta_ell >= threshold => a,
            _ => {
                self.converged = true;
                return Ok(StepOutcome::Converged);
            }
        };
        self.apply(&action)?;
        self.state.iter += 1;
        self.state.ell_trace.push(action.delta_ell);
        self.ell_total += action.delta_ell;
        self.counts.record(action.kind);

        let period = self.opts.lambda_refresh_period;
        let refresh = self.opts.fixed_lambda.is_none() && period > 0 && self.state.iter.is_multiple_of(period);
        if refresh {
            self.state.lambda = update_lambda(&self.state, self.y, self.phi);
            self.state.rebuild(self.phi, self.y)?;
        }
        let snapshot = self
            .opts
            .record_snapshots
            .then(|| self.state.active.iter().copied().zip(self.state.mu.iter().copied()).collect());
        self.diagnostics.push(IterationRecord {
            kind: action.kind,
            index: action.index,
            delta_ell: action.delta_ell,
            active_size: self.state.active.len(),
            lambda: self.state.lambda,
            lambda_refreshed: refresh,
            snapshot,
        });
        Ok(StepOutcome::Applied(action))
    }

    pub fn run(mut self) -> Result<SblResult> {
        while let StepOutcome::Applied(_) = self.step()? {}
        Ok(self.finish())
    }

    pub fn finish(self) -> SblResult {
        let mut order: Vec<usize> = (0..self.state.active.len()).collect();
        order.sort_by_key(|&j| self.state.active[j]);
        SblResult {
            alpha_hat: self.state.alpha_full(),
            support: order.iter().map(|&j| self.state.active[j]).collect(),
            gamma_hat: order.iter().map(|&j| self.state.gamma[j]).collect(),
            lambda_hat: self.state.lambda,
            iterations: self.state.iter,
            converged: self.converged,
            counts: self.counts,
            diagnostics: self.diagnostics,
        }
    }
}

/// Runs the greedy engine to convergence or `max_iter`.
pub fn run(y: &CVector, phi: &CMatrix, opts: &SblOptions) -> Result<SblResult> {
    FastSbl::new(phi, y, opts.clone())?.run()
}
