use super::{build_dictionary, ChannelProfile, DelayGrid, Dictionary, OfdmConfig};
use crate::error::Result;
use crate::kv::KeyValues;

/// Scenario parameters shared by the model and the experiment harness.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub n_subcarriers: usize,
    pub subcarrier_spacing_hz: f64,
    pub sampling_time_s: f64,
    pub cp_length_samples: f64,
    pub n_pilots: usize,
    /// Grid size is specified directly; resolution is `tau_max / (L - 1)`.
    pub grid_size_l: usize,
    pub mean_k: f64,
    pub decay_v_samples: f64,
    pub tau_max_samples: f64,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            n_subcarriers: 1200,
            subcarrier_spacing_hz: 15e3,
            sampling_time_s: 32.55e-9,
            cp_length_samples: 144.0,
            n_pilots: 100,
            grid_size_l: 200,
            mean_k: 10.0,
            decay_v_samples: 40.0,
            tau_max_samples: 144.0,
            seed: 0,
        }
    }
}

impl Scenario {
    pub const KEYS: [&'static str; 10] = [
        "n_subcarriers",
        "subcarrier_spacing_hz",
        "sampling_time_s",
        "cp_length_samples",
        "n_pilots",
        "grid_size_L",
        "mean_K",
        "decay_v_samples",
        "tau_max_samples",
        "seed",
    ];

    /// Desk-scale variant: N=300, M=50, L=100, same channel statistics.
    pub fn scaled() -> Self {
        Self { n_subcarriers: 300, n_pilots: 50, grid_size_l: 100, ..Self::default() }
    }

    /// Reads the scenario keys, falling back to defaults for missing ones.
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let d = Self::default();
        Ok(Self {
            n_subcarriers: kv.get_or("n_subcarriers", d.n_subcarriers)?,
            subcarrier_spacing_hz: kv.get_or("subcarrier_spacing_hz", d.subcarrier_spacing_hz)?,
            sampling_time_s: kv.get_or("sampling_time_s", d.sampling_time_s)?,
            cp_length_samples: kv.get_or("cp_length_samples", d.cp_length_samples)?,
            n_pilots: kv.get_or("n_pilots", d.n_pilots)?,
            grid_size_l: kv.get_or("grid_size_L", d.grid_size_l)?,
            mean_k: kv.get_or("mean_K", d.mean_k)?,
            decay_v_samples: kv.get_or("decay_v_samples", d.decay_v_samples)?,
            tau_max_samples: kv.get_or("tau_max_samples", d.tau_max_samples)?,
            seed: kv.get_or("seed", d.seed)?,
        })
    }

    pub fn to_kv_lines(&self) -> Vec<(String, String)> {
        vec![
            ("n_subcarriers".into(), self.n_subcarriers.to_string()),
            ("subcarrier_spacing_hz".into(), self.subcarrier_spacing_hz.to_string()),
            ("sampling_time_s".into(), self.sampling_time_s.to_string()),
            ("cp_length_samples".into(), self.cp_length_samples.to_string()),
            ("n_pilots".into(), self.n_pilots.to_string()),
            ("grid_size_L".into(), self.grid_size_l.to_string()),
            ("mean_K".into(), self.mean_k.to_string()),
            ("decay_v_samples".into(), self.decay_v_samples.to_string()),
            ("tau_max_samples".into(), self.tau_max_samples.to_string()),
            ("seed".into(), self.seed.to_string()),
        ]
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max_samples * self.sampling_time_s
    }

    pub fn ofdm(&self) -> Result<OfdmConfig> {
        OfdmConfig::new(
            self.n_subcarriers,
            self.subcarrier_spacing_hz,
            self.sampling_time_s,
            self.cp_length_samples,
            self.n_pilots,
        )
    }

    pub fn profile(&self) -> Result<ChannelProfile> {
        ChannelProfile::new(self.mean_k, self.tau_max(), self.decay_v_samples * self.sampling_time_s)
    }

    pub fn grid(&self) -> Result<DelayGrid> {
        DelayGrid::with_size(self.tau_max(), self.grid_size_l)
    }

    /// Pilot-row dictionary and full-band dictionary over the same grid.
    pub fn dictionaries(&self, ofdm: &OfdmConfig) -> Result<(Dictionary, Dictionary)> {
        let grid = self.grid()?;
        Ok((build_dictionary(&ofdm.pilot_freqs(), &grid), build_dictionary(&ofdm.freqs(), &grid)))
    }
}
