//! OFDM pilot model: subcarrier layout, delay grid, dictionaries, the marked
//! Poisson multipath channel and noisy pilot observations.

mod channel;
mod grid;
mod ofdm;
mod scenario;

pub use channel::{
    channel_frequency_response, complex_gaussian, compute_power_norm, draw_channel, make_pilot_observation,
    ChannelProfile, ChannelRealization, PilotObservation,
};
pub use grid::{build_delay_grid, build_dictionary, DelayGrid, Dictionary};
pub use ofdm::{evenly_spaced_pilots, OfdmConfig};
pub use scenario::Scenario;

/// SNR in dB to noise precision. Channel and pilots have unit power, so the
/// linear SNR is the noise precision itself.
pub fn snr_db_to_precision(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}
