use crate::error::{Error, Result};

/// Subcarrier layout of a single OFDM block.
///
/// Pilot indices are zero-based here; subcarrier `n` sits at baseband
/// frequency `n * subcarrier_spacing`.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmConfig {
    pub n_subcarriers: usize,
    pub subcarrier_spacing: f64,
    pub sampling_time: f64,
    /// Cyclic prefix duration in seconds.
    pub cp_length: f64,
    pilot_indices: Vec<usize>,
}

/// `round(i (N-1)/(M-1))` for `i = 0..M`, deduplicated. Includes both band edges.
pub fn evenly_spaced_pilots(n: usize, m: usize) -> Vec<usize> {
    if m == 0 {
        return Vec::new();
    }
    if m == 1 {
        return vec![0];
    }
    let step = (n - 1) as f64 / (m - 1) as f64;
    let mut idx: Vec<usize> = (0..m).map(|i| (i as f64 * step).round() as usize).collect();
    idx.dedup();
    idx
}

impl OfdmConfig {
    /// Layout with `n_pilots` evenly spaced pilots.
    pub fn new(
        n_subcarriers: usize,
        subcarrier_spacing: f64,
        sampling_time: f64,
        cp_samples: f64,
        n_pilots: usize,
    ) -> Result<Self> {
        Self::with_pilots(
            n_subcarriers,
            subcarrier_spacing,
            sampling_time,
            cp_samples * sampling_time,
            evenly_spaced_pilots(n_subcarriers, n_pilots),
        )
    }

    pub fn with_pilots(
        n_subcarriers: usize,
        subcarrier_spacing: f64,
        sampling_time: f64,
        cp_length: f64,
        pilot_indices: Vec<usize>,
    ) -> Result<Self> {
        if n_subcarriers == 0 {
            return Err(Error::InvalidConfig("no subcarriers".into()));
        }
        if !(subcarrier_spacing > 0.0 && sampling_time > 0.0 && cp_length >= 0.0) {
            return Err(Error::InvalidConfig("spacing and sampling time must be positive".into()));
        }
        if pilot_indices.is_empty() || pilot_indices.len() >= n_subcarriers {
            return Err(Error::InvalidConfig(format!(
                "need 0 < M < N, got M={} N={n_subcarriers}",
                pilot_indices.len()
            )));
        }
        if pilot_indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("pilot indices must be strictly increasing".into()));
        }
        if *pilot_indices.last().unwrap() >= n_subcarriers {
            return Err(Error::InvalidConfig("pilot index out of range".into()));
        }
        Ok(Self { n_subcarriers, subcarrier_spacing, sampling_time, cp_length, pilot_indices })
    }

    /// The LTE-like scenario: N=1200, 15 kHz, Ts=32.55 ns, CP=144 Ts, M=100.
    pub fn lte() -> Self {
        Self::new(1200, 15e3, 32.55e-9, 144.0, 100).expect("valid defaults")
    }

    pub fn pilot_indices(&self) -> &[usize] {
        &self.pilot_indices
    }

    pub fn n_pilots(&self) -> usize {
        self.pilot_indices.len()
    }

    /// Non-pilot subcarriers in increasing order.
    pub fn data_indices(&self) -> Vec<usize> {
        let mut p = self.pilot_indices.iter().peekable();
        (0..self.n_subcarriers)
            .filter(|n| {
                if p.peek() == Some(&n) {
                    p.next();
                    false
                } else {
                    true
                }
            })
            .collect()
    }

    pub fn frequency(&self, n: usize) -> f64 {
        n as f64 * self.subcarrier_spacing
    }

    pub fn freqs(&self) -> Vec<f64> {
        (0..self.n_subcarriers).map(|n| self.frequency(n)).collect()
    }

    pub fn pilot_freqs(&self) -> Vec<f64> {
        self.pilot_indices.iter().map(|&n| self.frequency(n)).collect()
    }
}
