#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sparsechan::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cn<R: Rng>(rng: &mut R, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let a: f64 = StandardNormal.sample(rng);
    let b: f64 = StandardNormal.sample(rng);
    Complex64::new(s * a, s * b)
}

/// i.i.d. CN(0,1) dictionary.
pub fn random_dictionary<R: Rng>(rng: &mut R, m: usize, l: usize) -> CMatrix {
    CMatrix::from_fn(m, l, |_, _| cn(rng, 1.0))
}

/// `y = Phi alpha + w` with `k` random nonzero weights; returns `(y, alpha)`.
pub fn sparse_instance<R: Rng>(rng: &mut R, phi: &CMatrix, k: usize, noise_var: f64) -> (CVector, CVector) {
    let l = phi.ncols();
    let mut alpha = CVector::zeros(l);
    let mut placed = 0;
    while placed < k {
        let j = rng.random_range(0..l);
        if alpha[j].norm() == 0.0 {
            alpha[j] = cn(rng, 1.0) + Complex64::new(0.5, 0.0);
            placed += 1;
        }
    }
    let y = phi * &alpha + CVector::from_fn(phi.nrows(), |_, _| cn(rng, noise_var));
    (y, alpha)
}

/// Direct evaluation from the marginal covariance `C = I/lambda + Phi_A Gamma Phi_A^H`,
/// inverted by LU. Returns `(Sigma, mu, S, Q)`.
pub fn batch_oracle(
    phi: &CMatrix,
    y: &CVector,
    active: &[usize],
    gamma: &[f64],
    lambda: f64,
) -> (CMatrix, CVector, Vec<f64>, Vec<Complex64>) {
    let m = phi.nrows();
    let mut c = CMatrix::identity(m, m) / Complex64::from(lambda);
    for (&a, &g) in active.iter().zip(gamma) {
        let col = phi.column(a);
        c += col * col.adjoint() * Complex64::from(g);
    }
    let cinv = c.lu().try_inverse().expect("C invertible");
    let s: Vec<f64> = (0..phi.ncols()).map(|l| phi.column(l).dotc(&(&cinv * phi.column(l))).re).collect();
    let cy = &cinv * y;
    let q: Vec<Complex64> = (0..phi.ncols()).map(|l| phi.column(l).dotc(&cy)).collect();

    let k = active.len();
    let pa = CMatrix::from_fn(m, k, |r, j| phi[(r, active[j])]);
    let mut prec = pa.ad_mul(&pa) * Complex64::from(lambda);
    for j in 0..k {
        prec[(j, j)] += 1.0 / gamma[j];
    }
    let sigma = if k == 0 { CMatrix::zeros(0, 0) } else { prec.lu().try_inverse().expect("precision invertible") };
    let mu = &sigma * pa.ad_mul(y) * Complex64::from(lambda);
    (sigma, mu, s, q)
}

pub fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

pub fn rel_err_real(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

/// Max of the normwise relative errors of `(Sigma, mu, S, Q)` against the oracle.
pub fn state_error(state: &sparsechan::sbl::fast::SblState, phi: &CMatrix, y: &CVector) -> f64 {
    let (sigma, mu, s, q) = batch_oracle(phi, y, &state.active, &state.gamma, state.lambda);
    if state.active.is_empty() {
        return rel_err_real(&state.s_cap, &s).max(rel_err(&state.q_cap, &q));
    }
    rel_err(state.sigma.as_slice(), sigma.as_slice())
        .max(rel_err(state.mu.as_slice(), mu.as_slice()))
        .max(rel_err_real(&state.s_cap, &s))
        .max(rel_err(&state.q_cap, &q))
}
