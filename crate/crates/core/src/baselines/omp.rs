use crate::error::{Error, Result};
use crate::linalg::{least_squares, select_columns, CMatrix, CVector};

#[derive(Debug, Clone, PartialEq)]
pub struct OmpResult {
    pub alpha_hat: CVector,
    /// Selection order.
    pub support: Vec<usize>,
    /// `||r||` before the first selection and after each refit.
    pub residual_norms: Vec<f64>,
}

/// Orthogonal matching pursuit with a least-squares refit after every selection.
///
/// Stops after `k_stop` selections, when the residual has no correlation left,
/// or (with a warning) when the next column would make the refit rank deficient.
pub fn omp(y: &CVector, phi: &CMatrix, k_stop: usize) -> Result<OmpResult> {
    let (m, l) = phi.shape();
    if y.len() != m {
        return Err(Error::Dimension(format!("dictionary has {m} rows, observation has {}", y.len())));
    }
    if k_stop == 0 || k_stop > m {
        return Err(Error::InvalidConfig(format!("k_stop {k_stop} outside 1..={m}")));
    }
    let norms: Vec<f64> = (0..l).map(|j| phi.column(j).norm()).collect();
    let mut support: Vec<usize> = Vec::with_capacity(k_stop);
    let mut coef = CVector::zeros(0);
    let mut resid = y.clone();
    let mut residual_norms = vec![resid.norm()];
    let floor = 1e-14 * y.norm();

    while support.len() < k_stop {
        let corr = phi.ad_mul(&resid);
        let mut best: Option<(usize, f64)> = None;
        for j in 0..l {
            if norms[j] == 0.0 || support.contains(&j) {
                continue;
            }
            let score = corr[j].norm() / norms[j];
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((j, score));
            }
        }
        let Some((j, score)) = best else { break };
        if score <= floor || residual_norms.last().is_some_and(|&r| r <= floor) {
            break;
        }
        support.push(j);
        let sub = select_columns(phi, &support);
        let Some(c) = least_squares(&sub, y) else {
            log::warn!("omp: column {j} makes the active set rank deficient, stopping at {}", support.len() - 1);
            support.pop();
            break;
        };
        resid = y - &sub * &c;
        residual_norms.push(resid.norm());
        coef = c;
    }

    let mut alpha_hat = CVector::zeros(l);
    for (k, &j) in support.iter().enumerate() {
        alpha_hat[j] = coef[k];
    }
    Ok(OmpResult { alpha_hat, support, residual_norms })
}
