//! Pilot-aided OFDM channel estimation with sparse Bayesian learning.
//!
//! The crate models a single-antenna OFDM link whose multipath channel is a
//! marked Poisson process, represents the pilot observations over a uniform
//! delay grid, and estimates the sparse grid weights with a greedy evidence
//! maximizer under a Bessel-K hierarchical prior ([`sbl::fast`]). Batch EM
//! ([`sbl::em`]), OMP, LASSO and a robust Wiener filter ([`baselines`]) are
//! included for comparison, together with the coded QPSK chain ([`comms`]) and
//! a Monte Carlo harness ([`harness`]) that produces NMSE / BER / iteration
//! statistics.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod comms;
pub mod error;
pub mod harness;
pub mod kv;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod sbl;

pub use error::{Error, Result};
pub use num_complex::Complex64;
