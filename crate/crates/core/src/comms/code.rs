use crate::error::{Error, Result};

/// Octal (133, 171, 165), constraint length 7.
pub const GENERATORS: [u32; 3] = [0o133, 0o171, 0o165];
pub const CONSTRAINT_LENGTH: usize = 7;
pub const TAIL: usize = CONSTRAINT_LENGTH - 1;
pub const N_STATES: usize = 1 << TAIL;

/// Encoder output for `state` (last six inputs, newest in bit 5) and input `u`.
#[inline]
pub(crate) fn branch_output(state: usize, u: usize) -> [u8; 3] {
    let reg = ((u << TAIL) | state) as u32;
    GENERATORS.map(|g| ((reg & g).count_ones() & 1) as u8)
}

#[inline]
pub(crate) fn next_state(state: usize, u: usize) -> usize {
    ((u << TAIL) | state) >> 1
}

/// Rate-1/3 mother code, zero-terminated: `3 (k + 6)` output bits, interleaved
/// per trellis step as `[g0, g1, g2, g0, ...]`.
pub fn conv_encode(bits: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(3 * (bits.len() + TAIL));
    let mut state = 0;
    for &b in bits.iter().chain(std::iter::repeat_n(&0u8, TAIL)) {
        let u = (b & 1) as usize;
        out.extend_from_slice(&branch_output(state, u));
        state = next_state(state, u);
    }
    out
}

fn spread(count: usize, over: usize) -> impl Iterator<Item = usize> {
    (0..count).map(move |i| ((2 * i + 1) * over) / (2 * count))
}

/// Keep-mask over a mother block of `mother_len` bits that keeps exactly `target`.
///
/// Keeps the first two streams of every step; the remaining difference is made up
/// by restoring third-stream bits (or dropping second-stream bits) at evenly
/// spaced steps.
pub fn puncture_mask(mother_len: usize, target: usize) -> Result<Vec<bool>> {
    if !mother_len.is_multiple_of(3) {
        return Err(Error::InvalidConfig(format!("mother length {mother_len} is not a multiple of 3")));
    }
    if target == 0 || target > mother_len {
        return Err(Error::InvalidConfig(format!("cannot keep {target} of {mother_len} bits")));
    }
    let steps = mother_len / 3;
    let mut mask: Vec<bool> = (0..mother_len).map(|i| i % 3 != 2).collect();
    let base = 2 * steps;
    if target > base {
        for t in spread(target - base, steps) {
            mask[3 * t + 2] = true;
        }
    } else if target < base {
        let drop = base - target;
        if drop <= steps {
            for t in spread(drop, steps) {
                mask[3 * t + 1] = false;
            }
        } else {
            for t in 0..steps {
                mask[3 * t + 1] = false;
            }
            for t in spread(drop - steps, steps) {
                mask[3 * t] = false;
            }
        }
    }
    debug_assert_eq!(mask.iter().filter(|k| **k).count(), target);
    Ok(mask)
}

fn check_len(got: usize, want: usize, what: &str) -> Result<()> {
    if got != want {
        return Err(Error::Dimension(format!("{what}: expected {want}, got {got}")));
    }
    Ok(())
}

pub fn puncture<T: Copy>(coded: &[T], mask: &[bool]) -> Result<Vec<T>> {
    check_len(coded.len(), mask.len(), "puncture input")?;
    Ok(coded.iter().zip(mask).filter(|(_, k)| **k).map(|(c, _)| *c).collect())
}

/// Puts received LLRs back at kept positions; deleted positions become 0 (erasures).
pub fn depuncture(llrs: &[f64], mask: &[bool]) -> Result<Vec<f64>> {
    let kept = mask.iter().filter(|k| **k).count();
    check_len(llrs.len(), kept, "depuncture input")?;
    let mut it = llrs.iter();
    Ok(mask.iter().map(|&k| if k { *it.next().unwrap() } else { 0.0 }).collect())
}

/// Block code parameters: information length and punctured length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeConfig {
    pub n_info: usize,
    pub n_coded: usize,
    mask: Vec<bool>,
}

impl CodeConfig {
    pub fn new(n_info: usize, n_coded: usize) -> Result<Self> {
        if n_info == 0 {
            return Err(Error::InvalidConfig("no information bits".into()));
        }
        let mask = puncture_mask(3 * (n_info + TAIL), n_coded)?;
        Ok(Self { n_info, n_coded, mask })
    }

    /// 1091 information bits onto 2 x 1100 data bits.
    pub fn lte() -> Self {
        Self::new(1091, 2200).expect("valid defaults")
    }

    pub fn mother_len(&self) -> usize {
        3 * (self.n_info + TAIL)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// The keep-mask as a `0`/`1` string, for result metadata.
    pub fn mask_string(&self) -> String {
        self.mask.iter().map(|&k| if k { '1' } else { '0' }).collect()
    }

    /// Information bits per punctured coded bit.
    pub fn rate(&self) -> f64 {
        self.n_info as f64 / self.n_coded as f64
    }
}
