use serde::{Deserialize, Serialize};

use super::run::MetricsRecord;

/// Aggregate over one (estimator, SNR, pilot count, grid size) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub estimator: String,
    pub snr_db: f64,
    pub n_pilots: u64,
    pub grid_l: u64,
    pub n_trials: u64,
    pub n_flagged: u64,
    pub nmse_mean: f64,
    pub nmse_median: f64,
    pub ber: Option<f64>,
    pub ber_lo: Option<f64>,
    pub ber_hi: Option<f64>,
    pub bit_errors: u64,
    pub n_bits: u64,
    pub iterations_median: f64,
    pub k_hat_mean: f64,
    pub adds_mean: f64,
    pub deletes_mean: f64,
    pub reestimates_mean: f64,
}

/// Wilson score interval at 95% for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = n as f64;
    let p = k as f64 / n;
    let z2n = z * z / n;
    let center = (p + 0.5 * z2n) / (1.0 + z2n);
    let half = z / (1.0 + z2n) * (p * (1.0 - p) / n + z2n / (4.0 * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

/// Groups records and aggregates each group; flagged records are counted but
/// excluded from the statistics. Groups with no usable record are dropped.
pub fn summarize(records: &[MetricsRecord]) -> Vec<SummaryRow> {
    let mut sorted: Vec<&MetricsRecord> = records.iter().collect();
    let key = |r: &MetricsRecord| (r.estimator.clone(), r.n_pilots, r.grid_l, r.snr_db.to_bits());
    sorted.sort_by(|a, b| {
        (&a.estimator, a.n_pilots, a.grid_l)
            .cmp(&(&b.estimator, b.n_pilots, b.grid_l))
            .then(a.snr_db.total_cmp(&b.snr_db))
    });
    let mut rows = Vec::new();
    for group in sorted.chunk_by(|a, b| key(a) == key(b)) {
        let first = group[0];
        let ok: Vec<&MetricsRecord> = group.iter().copied().filter(|r| !r.flagged && r.nmse.is_some()).collect();
        if ok.is_empty() {
            log::warn!(
                "no usable records for {} at {} dB (M={}, L={}); group omitted",
                first.estimator,
                first.snr_db,
                first.n_pilots,
                first.grid_l
            );
            continue;
        }
        let mut nmse: Vec<f64> = ok.iter().filter_map(|r| r.nmse).collect();
        let mut iters: Vec<f64> = ok.iter().map(|r| r.iterations as f64).collect();
        let bit_errors: u64 = ok.iter().map(|r| r.bit_errors).sum();
        let n_bits: u64 = ok.iter().map(|r| r.n_bits).sum();
        let (ber, ber_lo, ber_hi) = if n_bits > 0 {
            let (lo, hi) = wilson_interval(bit_errors, n_bits);
            (Some(bit_errors as f64 / n_bits as f64), Some(lo), Some(hi))
        } else {
            (None, None, None)
        };
        rows.push(SummaryRow {
            estimator: first.estimator.clone(),
            snr_db: first.snr_db,
            n_pilots: first.n_pilots,
            grid_l: first.grid_l,
            n_trials: group.len() as u64,
            n_flagged: (group.len() - ok.len()) as u64,
            nmse_mean: mean(nmse.iter().copied()),
            nmse_median: median(&mut nmse),
            ber,
            ber_lo,
            ber_hi,
            bit_errors,
            n_bits,
            iterations_median: median(&mut iters),
            k_hat_mean: mean(ok.iter().map(|r| r.k_hat as f64)),
            adds_mean: mean(ok.iter().map(|r| r.adds as f64)),
            deletes_mean: mean(ok.iter().map(|r| r.deletes as f64)),
            reestimates_mean: mean(ok.iter().map(|r| r.reestimates as f64)),
        });
    }
    rows
}
