use super::code::{branch_output, next_state, N_STATES, TAIL};
use crate::error::{Error, Result};

#[inline]
fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Posterior LLRs `ln P(u=0|r) / P(u=1|r)` of the information bits, given
/// mother-code LLRs in the same convention (positive favors bit 0).
pub fn bcjr_posteriors(llrs: &[f64]) -> Result<Vec<f64>> {
    if !llrs.len().is_multiple_of(3) || llrs.len() < 3 * (TAIL + 1) {
        return Err(Error::Dimension(format!("{} LLRs is not a terminated mother block", llrs.len())));
    }
    let steps = llrs.len() / 3;
    let k = steps - TAIL;

    // gamma(t, s, u) = sum_i +-L_i / 2
    let gamma = |t: usize, s: usize, u: usize| -> f64 {
        let c = branch_output(s, u);
        (0..3).map(|i| if c[i] == 0 { 0.5 * llrs[3 * t + i] } else { -0.5 * llrs[3 * t + i] }).sum()
    };
    let inputs = |t: usize| if t < k { 0..2 } else { 0..1 };

    let ninf = f64::NEG_INFINITY;
    let mut alpha = vec![[ninf; N_STATES]; steps + 1];
    alpha[0][0] = 0.0;
    for t in 0..steps {
        let mut next = [ninf; N_STATES];
        for s in 0..N_STATES {
            let a = alpha[t][s];
            if a == ninf {
                continue;
            }
            for u in inputs(t) {
                let ns = next_state(s, u);
                next[ns] = log_add(next[ns], a + gamma(t, s, u));
            }
        }
        let norm = next.iter().copied().fold(ninf, f64::max);
        for v in next.iter_mut() {
            *v -= norm;
        }
        alpha[t + 1] = next;
    }

    let mut beta = [ninf; N_STATES];
    beta[0] = 0.0;
    let mut out = vec![0.0; k];
    for t in (0..steps).rev() {
        let mut prev = [ninf; N_STATES];
        let mut num = [ninf; 2];
        for s in 0..N_STATES {
            for u in inputs(t) {
                let ns = next_state(s, u);
                if beta[ns] == ninf {
                    continue;
                }
                let g = gamma(t, s, u) + beta[ns];
                prev[s] = log_add(prev[s], g);
                if t < k && alpha[t][s] != ninf {
                    num[u] = log_add(num[u], alpha[t][s] + g);
                }
            }
        }
        if t < k {
            out[t] = num[0] - num[1];
        }
        let norm = prev.iter().copied().fold(ninf, f64::max);
        for v in prev.iter_mut() {
            *v -= norm;
        }
        beta = prev;
    }
    Ok(out)
}

/// Hard decisions on the information bits; a zero posterior LLR decides 0.
pub fn bcjr_decode(llrs: &[f64]) -> Result<Vec<u8>> {
    Ok(bcjr_posteriors(llrs)?.into_iter().map(|l| u8::from(l < 0.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::super::code::conv_encode;
    use super::*;

    #[test]
    fn clean_codeword() {
        let bits: Vec<u8> = (0..50).map(|i| ((i * 7 + 3) % 5 < 2) as u8).collect();
        let llr: Vec<f64> = conv_encode(&bits).iter().map(|&c| if c == 0 { 20.0 } else { -20.0 }).collect();
        assert_eq!(bcjr_decode(&llr).unwrap(), bits);
    }

    #[test]
    fn no_information() {
        let post = bcjr_posteriors(&[0.0; 3 * 30]).unwrap();
        assert_eq!(post.len(), 24);
        assert!(post.iter().all(|l| l.abs() < 1e-12), "{post:?}");
        assert!(bcjr_decode(&[0.0; 90]).unwrap().iter().all(|b| *b == 0));
    }

    #[test]
    fn bad_length() {
        assert!(bcjr_posteriors(&[0.0; 10]).is_err());
        assert!(bcjr_posteriors(&[0.0; 18]).is_err());
    }
}
