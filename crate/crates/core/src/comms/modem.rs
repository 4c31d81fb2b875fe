use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Uniform random permutation of `0..n` determined by `seed`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(&mut ChaCha12Rng::seed_from_u64(seed));
    p
}

/// `out[i] = x[perm[i]]`.
pub fn interleave<T: Copy>(x: &[T], seed: u64) -> Vec<T> {
    permutation(x.len(), seed).into_iter().map(|j| x[j]).collect()
}

pub fn deinterleave<T: Copy + Default>(x: &[T], seed: u64) -> Vec<T> {
    let mut out = vec![T::default(); x.len()];
    for (i, j) in permutation(x.len(), seed).into_iter().enumerate() {
        out[j] = x[i];
    }
    out
}

/// Gray QPSK: `(b1, b0) -> ((1 - 2 b1) + j (1 - 2 b0)) / sqrt 2` over consecutive pairs.
pub fn qpsk_map(bits: &[u8]) -> Vec<Complex64> {
    bits.chunks(2)
        .map(|p| {
            let b1 = p[0] & 1;
            let b0 = p.get(1).copied().unwrap_or(0) & 1;
            Complex64::new(1.0 - 2.0 * b1 as f64, 1.0 - 2.0 * b0 as f64) / SQRT_2
        })
        .collect()
}

/// Exact LLRs `[b1, b0]` of `y = h x + n`, `n ~ CN(0, 1/lambda)`. `h = 0` gives erasures.
pub fn qpsk_llr(y: Complex64, h: Complex64, lambda: f64) -> [f64; 2] {
    let z = h.conj() * y * (2.0 * SQRT_2 * lambda);
    [z.re, z.im]
}
