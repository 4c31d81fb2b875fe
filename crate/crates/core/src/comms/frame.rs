use num_complex::Complex64;

use super::bcjr::bcjr_decode;
use super::code::{conv_encode, depuncture, puncture, CodeConfig};
use super::modem::{deinterleave, interleave, qpsk_llr, qpsk_map};
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::model::OfdmConfig;
use crate::rng::splitmix;

/// One OFDM symbol worth of coded data plus pilots.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub info_bits: Vec<u8>,
    /// Mother code output.
    pub coded_bits: Vec<u8>,
    /// Punctured then interleaved.
    pub interleaved_bits: Vec<u8>,
    pub data_symbols: Vec<Complex64>,
    pub pilot_symbols: Vec<Complex64>,
    /// Full symbol vector over all subcarriers.
    pub x: CVector,
}

fn interleaver_seed(seed: u64) -> u64 {
    splitmix(seed ^ 0x696e_7465_726c_7676)
}

fn pilot_seed(seed: u64) -> u64 {
    splitmix(seed ^ 0x7069_6c6f_7473_7373)
}

fn check_capacity(ofdm: &OfdmConfig, code: &CodeConfig) -> Result<usize> {
    let n_data = ofdm.n_subcarriers - ofdm.n_pilots();
    if code.n_coded != 2 * n_data {
        return Err(Error::Dimension(format!("{} coded bits do not fill {n_data} QPSK data symbols", code.n_coded)));
    }
    Ok(n_data)
}

pub fn assemble_frame(info_bits: &[u8], ofdm: &OfdmConfig, code: &CodeConfig, seed: u64) -> Result<Frame> {
    check_capacity(ofdm, code)?;
    if info_bits.len() != code.n_info {
        return Err(Error::Dimension(format!("expected {} information bits, got {}", code.n_info, info_bits.len())));
    }
    let coded_bits = conv_encode(info_bits);
    let interleaved_bits = interleave(&puncture(&coded_bits, code.mask())?, interleaver_seed(seed));
    let data_symbols = qpsk_map(&interleaved_bits);

    let pbits: Vec<u8> = {
        let p = super::modem::permutation(2 * ofdm.n_pilots(), pilot_seed(seed));
        p.iter().map(|&j| (j & 1) as u8).collect()
    };
    let pilot_symbols = qpsk_map(&pbits);

    let mut x = CVector::zeros(ofdm.n_subcarriers);
    for (k, &n) in ofdm.pilot_indices().iter().enumerate() {
        x[n] = pilot_symbols[k];
    }
    for (k, n) in ofdm.data_indices().into_iter().enumerate() {
        x[n] = data_symbols[k];
    }
    Ok(Frame { info_bits: info_bits.to_vec(), coded_bits, interleaved_bits, data_symbols, pilot_symbols, x })
}

/// Channel LLRs of the interleaved bit stream, from the data subcarriers.
pub fn data_llrs(y_full: &CVector, h_hat: &CVector, lambda: f64, ofdm: &OfdmConfig) -> Result<Vec<f64>> {
    let n = ofdm.n_subcarriers;
    if y_full.len() != n || h_hat.len() != n {
        return Err(Error::Dimension(format!("expected {n} subcarriers, got y={} h={}", y_full.len(), h_hat.len())));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidConfig(format!("lambda {lambda} must be positive")));
    }
    Ok(ofdm.data_indices().into_iter().flat_map(|k| qpsk_llr(y_full[k], h_hat[k], lambda)).collect())
}

/// Receiver: per-subcarrier LLRs with the estimated channel, deinterleave,
/// depuncture, BCJR.
pub fn recover_bits(
    y_full: &CVector,
    h_hat: &CVector,
    lambda: f64,
    ofdm: &OfdmConfig,
    code: &CodeConfig,
    seed: u64,
) -> Result<Vec<u8>> {
    check_capacity(ofdm, code)?;
    // an infinite precision would turn every LLR into +-inf or NaN
    let lambda = if lambda.is_finite() { lambda } else { 1e12 };
    let llrs = data_llrs(y_full, h_hat, lambda, ofdm)?;
    let mother = depuncture(&deinterleave(&llrs, interleaver_seed(seed)), code.mask())?;
    bcjr_decode(&mother)
}
