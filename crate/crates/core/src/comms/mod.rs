//! Coded QPSK transmission over one OFDM symbol: rate-1/3 convolutional code,
//! puncturing to the data capacity, random interleaving, Gray QPSK, and a
//! log-domain BCJR receiver.

mod bcjr;
mod code;
mod frame;
mod modem;

pub use bcjr::{bcjr_decode, bcjr_posteriors};
pub use code::{
    conv_encode, depuncture, puncture, puncture_mask, CodeConfig, CONSTRAINT_LENGTH, GENERATORS, N_STATES, TAIL,
};
pub use frame::{assemble_frame, data_llrs, recover_bits, Frame};
pub use modem::{deinterleave, interleave, permutation, qpsk_llr, qpsk_map};
