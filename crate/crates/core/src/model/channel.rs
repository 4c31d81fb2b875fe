use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::grid::phasor;
use super::ofdm::OfdmConfig;
use crate::error::{Error, Result};
use crate::linalg::CVector;

/// Statistics of the marked Poisson multipath channel: `K ~ Poisson(mean_k)`,
/// delays uniform on `[0, tau_max]`, gain variance `u exp(-tau / v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelProfile {
    pub mean_k: f64,
    pub tau_max: f64,
    pub v: f64,
    pub u: f64,
}

impl ChannelProfile {
    /// Profile with `u` chosen so that `E[sum |beta_k|^2] = 1`.
    pub fn new(mean_k: f64, tau_max: f64, v: f64) -> Result<Self> {
        if !(mean_k > 0.0 && tau_max > 0.0 && v > 0.0) {
            return Err(Error::InvalidConfig("mean_k, tau_max and v must be positive".into()));
        }
        let mut p = Self { mean_k, tau_max, v, u: 0.0 };
        p.u = compute_power_norm(&p);
        Ok(p)
    }

    pub fn gain_variance(&self, tau: f64) -> f64 {
        self.u * (-tau / self.v).exp()
    }
}

/// Power scale `u = tau_max / (mean_k v (1 - exp(-tau_max / v)))`.
pub fn compute_power_norm(profile: &ChannelProfile) -> f64 {
    let x = profile.tau_max / profile.v;
    // -expm1(-x) keeps precision when v >> tau_max
    profile.tau_max / (profile.mean_k * profile.v * -(-x).exp_m1())
}

/// One realization `g(tau) = sum_k beta_k delta(tau - tau_k)`; may be empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChannelRealization {
    pub taus: Vec<f64>,
    pub betas: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    pub fn power(&self) -> f64 {
        self.betas.iter().map(|b| b.norm_sqr()).sum()
    }
}

/// Circularly symmetric complex Gaussian with total variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

pub fn draw_channel<R: Rng + ?Sized>(rng: &mut R, profile: &ChannelProfile) -> ChannelRealization {
    let k = Poisson::new(profile.mean_k).expect("positive mean").sample(rng) as usize;
    let taus: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * profile.tau_max).collect();
    let betas = taus.iter().map(|&t| complex_gaussian(rng, profile.gain_variance(t))).collect();
    ChannelRealization { taus, betas }
}

/// `h(f) = sum_k beta_k exp(-j 2 pi f tau_k)` at each frequency.
pub fn channel_frequency_response(ch: &ChannelRealization, freqs: &[f64]) -> CVector {
    CVector::from_iterator(
        freqs.len(),
        freqs.iter().map(|&f| ch.taus.iter().zip(&ch.betas).map(|(&t, &b)| b * phasor(f, t)).sum()),
    )
}

/// Pilot-domain observation `y = h_P + w` with noise precision `lambda_true`.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotObservation {
    pub y: CVector,
    pub lambda_true: f64,
    pub h_true_full: CVector,
}

pub fn make_pilot_observation<R: Rng + ?Sized>(
    ch: &ChannelRealization,
    config: &OfdmConfig,
    lambda: f64,
    rng: &mut R,
) -> Result<PilotObservation> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidConfig(format!("noise precision must be positive, got {lambda}")));
    }
    let h_full = channel_frequency_response(ch, &config.freqs());
    let var = lambda.recip();
    let y = CVector::from_iterator(
        config.n_pilots(),
        config.pilot_indices().iter().map(|&n| {
            let w = if var > 0.0 { complex_gaussian(rng, var) } else { Complex64::new(0.0, 0.0) };
            h_full[n] + w
        }),
    );
    Ok(PilotObservation { y, lambda_true: lambda, h_true_full: h_full })
}
