use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Estimator, ExperimentConfig};
use super::io::Metadata;
use crate::baselines::{lasso_solve, omp, rho_from_precision, LassoConfig, RwfConfig, RwfFilter};
use crate::comms::{assemble_frame, recover_bits, CodeConfig};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::model::{
    channel_frequency_response, complex_gaussian, draw_channel, snr_db_to_precision, ChannelProfile, OfdmConfig,
    Scenario,
};
use crate::rng::{channel_stream, trial_stream};
use crate::sbl::em::{run_em, EmOptions};
use crate::sbl::fast::{self, ActionKind, IterationRecord};
use crate::sbl::{PriorConfig, SblOptions};

/// One estimator on one trial. Column order is the CSV order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub estimator: String,
    pub snr_db: f64,
    pub trial: u64,
    /// `||h_hat - h||^2 / ||h||^2` over all subcarriers.
    pub nmse: Option<f64>,
    pub ber: Option<f64>,
    pub iterations: u64,
    pub k_hat: u64,
    pub adds: u64,
    pub deletes: u64,
    pub reestimates: u64,
    /// Estimation time; 0 unless timing was requested.
    pub wall_time_s: f64,
    /// `||h_hat - h||^2 / N`.
    pub mse: Option<f64>,
    pub n_pilots: u64,
    pub grid_l: u64,
    pub bit_errors: u64,
    pub n_bits: u64,
    pub converged: bool,
    /// The estimator failed on this trial; metrics are absent.
    pub flagged: bool,
}

/// One applied action of a greedy engine, with the NMSE of the current mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub estimator: String,
    pub snr_db: f64,
    pub n_pilots: u64,
    pub grid_l: u64,
    pub trial: u64,
    pub iteration: u64,
    pub action: String,
    pub index: u64,
    pub k_hat: u64,
    pub lambda: f64,
    pub nmse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<MetricsRecord>,
    pub traces: Vec<TraceRecord>,
    pub metadata: Metadata,
}

impl ExperimentOutput {
    pub fn flagged(&self) -> usize {
        self.records.iter().filter(|r| r.flagged).count()
    }
}

struct PointContext {
    scenario: Scenario,
    ofdm: OfdmConfig,
    profile: ChannelProfile,
    freqs: Vec<f64>,
    phi_pilot: CMatrix,
    phi_full: CMatrix,
    code: CodeConfig,
    /// One robust Wiener filter per SNR.
    rwf: Vec<Option<RwfFilter>>,
}

impl PointContext {
    fn new(cfg: &ExperimentConfig, scenario: Scenario) -> Result<Self> {
        let ofdm = scenario.ofdm()?;
        let profile = scenario.profile()?;
        let (dp, df) = scenario.dictionaries(&ofdm)?;
        let n_data = ofdm.n_subcarriers - ofdm.n_pilots();
        let code = CodeConfig::new(cfg.info_bits_for(&scenario), 2 * n_data)?;
        let rwf = cfg
            .snr_db
            .iter()
            .map(|&snr| {
                if !cfg.estimators.contains(&Estimator::Rwf) {
                    return Ok(None);
                }
                let rc =
                    RwfConfig::new(scenario.cp_length_samples * scenario.sampling_time_s, snr_db_to_precision(snr))?;
                RwfFilter::new(&ofdm, &rc).map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            freqs: ofdm.freqs(),
            scenario,
            ofdm,
            profile,
            phi_pilot: dp.entries,
            phi_full: df.entries,
            code,
            rwf,
        })
    }

    fn synthesize(&self, alpha: impl IntoIterator<Item = (usize, Complex64)>) -> CVector {
        let mut h = CVector::zeros(self.phi_full.nrows());
        for (l, a) in alpha {
            h.axpy(a, &self.phi_full.column(l), Complex64::new(1.0, 0.0));
        }
        h
    }
}

#[derive(Default)]
struct Estimate {
    h_hat: CVector,
    iterations: usize,
    k_hat: usize,
    adds: usize,
    deletes: usize,
    reestimates: usize,
    converged: bool,
    trace: Vec<IterationRecord>,
}

fn prior_for(est: Estimator, cfg: &ExperimentConfig) -> Result<PriorConfig> {
    Ok(match est {
        Estimator::FastRvm => PriorConfig::rvm(),
        Estimator::FastLaplace => PriorConfig::laplace(cfg.laplace_eta)?,
        _ => PriorConfig::bessel_k(),
    })
}

fn nonzero(alpha: &CVector) -> impl Iterator<Item = (usize, Complex64)> + '_ {
    alpha.iter().enumerate().filter(|(_, a)| a.norm_sqr() > 0.0).map(|(l, a)| (l, *a))
}

fn estimate(
    est: Estimator,
    cfg: &ExperimentConfig,
    ctx: &PointContext,
    snr_idx: usize,
    y: &CVector,
    h: &CVector,
    lambda: f64,
) -> Result<Estimate> {
    let phi = &ctx.phi_pilot;
    match est {
        Estimator::FastBesselK | Estimator::FastRvm | Estimator::FastLaplace => {
            let mut opts = SblOptions::fast(prior_for(est, cfg)?);
            opts.record_snapshots = cfg.sweep == super::Sweep::Iterations;
            let res = fast::run(y, phi, &opts)?;
            Ok(Estimate {
                h_hat: ctx.synthesize(res.support.iter().map(|&l| (l, res.alpha_hat[l]))),
                iterations: res.iterations,
                k_hat: res.support.len(),
                adds: res.counts.adds,
                deletes: res.counts.deletes,
                reestimates: res.counts.reestimates,
                converged: res.converged,
                trace: res.diagnostics,
            })
        }
        Estimator::EmBesselK => {
            let res = run_em(y, phi, &EmOptions::new(PriorConfig::bessel_k()))?;
            let alpha = res.alpha_hat();
            Ok(Estimate {
                h_hat: ctx.synthesize(nonzero(&alpha)),
                iterations: res.iterations,
                k_hat: res.support.len(),
                converged: res.converged,
                ..Default::default()
            })
        }
        Estimator::Omp => {
            let k = ((ctx.scenario.mean_k.round() as usize) + 10).min(phi.nrows());
            let res = omp(y, phi, k)?;
            Ok(Estimate {
                h_hat: ctx.synthesize(nonzero(&res.alpha_hat)),
                iterations: res.support.len(),
                k_hat: res.support.len(),
                converged: true,
                ..Default::default()
            })
        }
        Estimator::Lasso | Estimator::LassoNoDebias => {
            let mut lc = LassoConfig::new(rho_from_precision(phi.ncols(), lambda))?;
            lc.debias = est == Estimator::Lasso;
            let res = lasso_solve(y, phi, &lc)?;
            Ok(Estimate {
                h_hat: ctx.synthesize(nonzero(&res.alpha_hat)),
                iterations: res.iterations,
                k_hat: nonzero(&res.alpha_hat).count(),
                converged: res.converged,
                ..Default::default()
            })
        }
        Estimator::Rwf => {
            let filter = ctx.rwf[snr_idx].as_ref().ok_or_else(|| Error::InvalidConfig("RWF filter missing".into()))?;
            Ok(Estimate { h_hat: filter.apply(y)?, converged: true, ..Default::default() })
        }
        Estimator::GenieCsi => Ok(Estimate { h_hat: h.clone(), converged: true, ..Default::default() }),
    }
}

fn squared_error(h_hat: &CVector, h: &CVector) -> (f64, f64) {
    let err = (h_hat - h).norm_squared();
    let n = h.len() as f64;
    let power = h.norm_squared();
    // an empty channel has no scale; fall back to the per-subcarrier error
    let nmse = if power > 0.0 { err / power } else { err / n };
    (nmse, err / n)
}

fn action_name(k: ActionKind) -> &'static str {
    match k {
        ActionKind::Add => "add",
        ActionKind::Delete => "delete",
        ActionKind::Reestimate => "reestimate",
        ActionKind::None => "none",
    }
}

fn run_trial(
    cfg: &ExperimentConfig,
    point_idx: usize,
    ctx: &PointContext,
    snr_idx: usize,
    trial: u64,
) -> Result<(Vec<MetricsRecord>, Vec<TraceRecord>)> {
    let snr = cfg.snr_db[snr_idx];
    let lambda = snr_db_to_precision(snr);
    let n = ctx.ofdm.n_subcarriers;

    let ch = draw_channel(&mut channel_stream(cfg.master_seed, trial), &ctx.profile);
    let h = channel_frequency_response(&ch, &ctx.freqs);

    let mut rng = trial_stream(cfg.master_seed, ((point_idx as u64) << 16) | snr_idx as u64, trial);
    let bits: Vec<u8> = (0..ctx.code.n_info).map(|_| rng.random_range(0..2u8)).collect();
    let frame_seed: u64 = rng.random();
    let frame = assemble_frame(&bits, &ctx.ofdm, &ctx.code, frame_seed)?;
    let var = lambda.recip();
    let r = CVector::from_fn(n, |i, _| frame.x[i] * h[i] + complex_gaussian(&mut rng, var));
    let y = CVector::from_iterator(ctx.ofdm.n_pilots(), ctx.ofdm.pilot_indices().iter().map(|&p| r[p] / frame.x[p]));

    let mut records = Vec::with_capacity(cfg.estimators.len());
    let mut traces = Vec::new();
    for &est in &cfg.estimators {
        let t0 = Instant::now();
        let result = estimate(est, cfg, ctx, snr_idx, &y, &h, lambda);
        let elapsed = t0.elapsed().as_secs_f64();
        let mut rec = MetricsRecord {
            estimator: est.name().to_string(),
            snr_db: snr,
            trial,
            nmse: None,
            ber: None,
            iterations: 0,
            k_hat: 0,
            adds: 0,
            deletes: 0,
            reestimates: 0,
            wall_time_s: if cfg.timing { elapsed } else { 0.0 },
            mse: None,
            n_pilots: ctx.ofdm.n_pilots() as u64,
            grid_l: ctx.phi_pilot.ncols() as u64,
            bit_errors: 0,
            n_bits: 0,
            converged: false,
            flagged: false,
        };
        match result {
            Err(e) => {
                log::warn!("{est} failed on trial {trial} at {snr} dB: {e}");
                rec.flagged = true;
            }
            Ok(est_out) => {
                let (nmse, mse) = squared_error(&est_out.h_hat, &h);
                rec.nmse = Some(nmse);
                rec.mse = Some(mse);
                rec.iterations = est_out.iterations as u64;
                rec.k_hat = est_out.k_hat as u64;
                rec.adds = est_out.adds as u64;
                rec.deletes = est_out.deletes as u64;
                rec.reestimates = est_out.reestimates as u64;
                rec.converged = est_out.converged;
                if cfg.compute_ber {
                    let dec = recover_bits(&r, &est_out.h_hat, lambda, &ctx.ofdm, &ctx.code, frame_seed)?;
                    let errors = dec.iter().zip(&bits).filter(|(a, b)| a != b).count();
                    rec.bit_errors = errors as u64;
                    rec.n_bits = bits.len() as u64;
                    rec.ber = Some(errors as f64 / bits.len() as f64);
                }
                for (i, d) in est_out.trace.iter().enumerate() {
                    let Some(snap) = &d.snapshot else { continue };
                    let (nmse, _) = squared_error(&ctx.synthesize(snap.iter().copied()), &h);
                    traces.push(TraceRecord {
                        estimator: est.name().to_string(),
                        snr_db: snr,
                        n_pilots: rec.n_pilots,
                        grid_l: rec.grid_l,
                        trial,
                        iteration: i as u64 + 1,
                        action: action_name(d.kind).to_string(),
                        index: d.index as u64,
                        k_hat: d.active_size as u64,
                        lambda: d.lambda,
                        nmse,
                    });
                }
            }
        }
        records.push(rec);
    }
    Ok((records, traces))
}

fn record_key(r: &MetricsRecord) -> (String, u64, u64, u64, u64) {
    // snr values are finite; the bit pattern of a nonnegative offset orders them
    (r.estimator.clone(), r.n_pilots, r.grid_l, ordered(r.snr_db), r.trial)
}

fn ordered(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// Runs every (sweep point, SNR, trial) job on a pool of `workers` threads
/// (all cores when `None`). Output order is canonical, not arrival order.
pub fn run_experiment(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let points = cfg.points();
    let ctxs = points.into_iter().map(|s| PointContext::new(cfg, s)).collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize, u64)> = (0..ctxs.len())
        .flat_map(|p| (0..cfg.snr_db.len()).flat_map(move |s| (0..cfg.n_trials as u64).map(move |t| (p, s, t))))
        .collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let parts: Vec<(Vec<MetricsRecord>, Vec<TraceRecord>)> = pool
        .install(|| jobs.par_iter().map(|&(p, s, t)| run_trial(cfg, p, &ctxs[p], s, t)).collect::<Result<Vec<_>>>())?;

    let mut records: Vec<MetricsRecord> = Vec::new();
    let mut traces: Vec<TraceRecord> = Vec::new();
    for (r, t) in parts {
        records.extend(r);
        traces.extend(t);
    }
    records.sort_by_key(record_key);
    traces.sort_by(|a, b| {
        (&a.estimator, a.n_pilots, a.grid_l, ordered(a.snr_db), a.trial, a.iteration).cmp(&(
            &b.estimator,
            b.n_pilots,
            b.grid_l,
            ordered(b.snr_db),
            b.trial,
            b.iteration,
        ))
    });

    let masks: BTreeMap<String, String> = ctxs
        .iter()
        .map(|c| (format!("M={},L={}", c.ofdm.n_pilots(), c.phi_pilot.ncols()), c.code.mask_string()))
        .collect();
    Ok(ExperimentOutput { records, traces, metadata: Metadata::new(cfg, masks) })
}
