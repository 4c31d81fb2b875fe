use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kv::KeyValues;
use crate::model::Scenario;
use crate::sbl::DEFAULT_LAPLACE_ETA;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Estimator {
    FastBesselK,
    FastRvm,
    FastLaplace,
    EmBesselK,
    Omp,
    /// LASSO with a least-squares refit on its support.
    Lasso,
    /// LASSO without the refit.
    LassoNoDebias,
    Rwf,
    GenieCsi,
}

impl Estimator {
    pub const ALL: [Estimator; 9] = [
        Estimator::FastBesselK,
        Estimator::FastRvm,
        Estimator::FastLaplace,
        Estimator::EmBesselK,
        Estimator::Omp,
        Estimator::Lasso,
        Estimator::LassoNoDebias,
        Estimator::Rwf,
        Estimator::GenieCsi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::FastBesselK => "FastBesselK",
            Estimator::FastRvm => "FastRVM",
            Estimator::FastLaplace => "FastLaplace",
            Estimator::EmBesselK => "EmBesselK",
            Estimator::Omp => "OMP",
            Estimator::Lasso => "LASSO",
            Estimator::LassoNoDebias => "LASSONoDebias",
            Estimator::Rwf => "RWF",
            Estimator::GenieCsi => "GenieCSI",
        }
    }

    pub fn is_fast_sbl(self) -> bool {
        matches!(self, Estimator::FastBesselK | Estimator::FastRvm | Estimator::FastLaplace)
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown estimator `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    Snr,
    Pilots,
    Grid,
    /// SNR sweep with per-iteration traces of the greedy engines.
    Iterations,
}

impl FromStr for Sweep {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "snr" => Ok(Sweep::Snr),
            "pilots" => Ok(Sweep::Pilots),
            "grid" | "grid_L" => Ok(Sweep::Grid),
            "iterations" => Ok(Sweep::Iterations),
            other => Err(Error::InvalidConfig(format!("unknown sweep `{other}`"))),
        }
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sweep::Snr => "snr",
            Sweep::Pilots => "pilots",
            Sweep::Grid => "grid",
            Sweep::Iterations => "iterations",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub estimators: Vec<Estimator>,
    pub snr_db: Vec<f64>,
    pub n_trials: usize,
    pub master_seed: u64,
    pub sweep: Sweep,
    /// Pilot counts visited by the `pilots` sweep.
    pub pilot_counts: Vec<usize>,
    /// Grid sizes visited by the `grid` sweep.
    pub grid_sizes: Vec<usize>,
    /// `None` means `N - M - 9`.
    pub n_info_bits: Option<usize>,
    pub compute_ber: bool,
    pub laplace_eta: f64,
    pub timing: bool,
}

const EXPERIMENT_KEYS: [&str; 9] = [
    "estimators",
    "snr_db",
    "n_trials",
    "sweep",
    "pilot_counts",
    "grid_sizes",
    "n_info_bits",
    "compute_ber",
    "laplace_eta",
];

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::default(),
            estimators: vec![
                Estimator::FastBesselK,
                Estimator::FastRvm,
                Estimator::Omp,
                Estimator::Lasso,
                Estimator::Rwf,
                Estimator::GenieCsi,
            ],
            snr_db: vec![15.0],
            n_trials: 500,
            master_seed: 0,
            sweep: Sweep::Snr,
            pilot_counts: Vec::new(),
            grid_sizes: Vec::new(),
            n_info_bits: None,
            compute_ber: true,
            laplace_eta: DEFAULT_LAPLACE_ETA,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_kv(&KeyValues::parse(text)?)
    }

    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let known: Vec<&str> = Scenario::KEYS.iter().chain(EXPERIMENT_KEYS.iter()).copied().collect();
        kv.reject_unknown(&known)?;
        let d = Self::default();
        let scenario = Scenario::from_kv(kv)?;
        let estimators: Vec<Estimator> = kv.get_list("estimators")?.unwrap_or(d.estimators);
        let cfg = Self {
            master_seed: scenario.seed,
            scenario,
            estimators,
            snr_db: kv.get_list("snr_db")?.unwrap_or(d.snr_db),
            n_trials: kv.get_or("n_trials", d.n_trials)?,
            sweep: kv.get_or("sweep", d.sweep)?,
            pilot_counts: kv.get_list("pilot_counts")?.unwrap_or_default(),
            grid_sizes: kv.get_list("grid_sizes")?.unwrap_or_default(),
            n_info_bits: kv.get("n_info_bits")?,
            compute_ber: kv.get_or("compute_ber", d.compute_ber)?,
            laplace_eta: kv.get_or("laplace_eta", d.laplace_eta)?,
            timing: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidConfig("no estimators".into()));
        }
        let mut seen = self.estimators.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.estimators.len() {
            return Err(Error::InvalidConfig("estimator listed twice".into()));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidConfig("snr_db must be a nonempty list of finite values".into()));
        }
        if !(self.laplace_eta > 0.0) {
            return Err(Error::InvalidConfig("laplace_eta must be positive".into()));
        }
        match self.sweep {
            Sweep::Pilots if self.pilot_counts.is_empty() => {
                Err(Error::InvalidConfig("pilots sweep needs pilot_counts".into()))
            }
            Sweep::Grid if self.grid_sizes.is_empty() => {
                Err(Error::InvalidConfig("grid sweep needs grid_sizes".into()))
            }
            _ => Ok(()),
        }
    }

    /// Scenarios visited by the sweep, in order.
    pub fn points(&self) -> Vec<Scenario> {
        match self.sweep {
            Sweep::Pilots => {
                self.pilot_counts.iter().map(|&m| Scenario { n_pilots: m, ..self.scenario.clone() }).collect()
            }
            Sweep::Grid => {
                self.grid_sizes.iter().map(|&l| Scenario { grid_size_l: l, ..self.scenario.clone() }).collect()
            }
            Sweep::Snr | Sweep::Iterations => vec![self.scenario.clone()],
        }
    }

    pub fn info_bits_for(&self, s: &Scenario) -> usize {
        self.n_info_bits.unwrap_or((s.n_subcarriers - s.n_pilots).saturating_sub(9))
    }

    /// Every setting that affects the results, as strings, for output metadata.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let join = |v: Vec<String>| v.join(",");
        let mut m: BTreeMap<String, String> = self.scenario.to_kv_lines().into_iter().collect();
        m.insert("master_seed".into(), self.master_seed.to_string());
        m.insert("estimators".into(), join(self.estimators.iter().map(|e| e.name().to_string()).collect()));
        m.insert("snr_db".into(), join(self.snr_db.iter().map(|v| v.to_string()).collect()));
        m.insert("n_trials".into(), self.n_trials.to_string());
        m.insert("sweep".into(), self.sweep.to_string());
        m.insert("pilot_counts".into(), join(self.pilot_counts.iter().map(|v| v.to_string()).collect()));
        m.insert("grid_sizes".into(), join(self.grid_sizes.iter().map(|v| v.to_string()).collect()));
        m.insert("n_info_bits".into(), self.n_info_bits.map_or("auto".into(), |v| v.to_string()));
        m.insert("compute_ber".into(), self.compute_ber.to_string());
        m.insert("laplace_eta".into(), self.laplace_eta.to_string());
        m.insert("timing".into(), self.timing.to_string());
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_full_config() {
        let cfg = ExperimentConfig::parse(
            "n_subcarriers = 300\nn_pilots = 50\ngrid_size_L = 100\nseed = 7\n\
             estimators = FastBesselK, RWF\nsnr_db = 0, 15\nn_trials = 3\nsweep = pilots\npilot_counts = 24,50\n",
        )
        .unwrap();
        assert_eq!(cfg.master_seed, 7);
        assert_eq!(cfg.estimators, vec![Estimator::FastBesselK, Estimator::Rwf]);
        assert_eq!(cfg.snr_db, vec![0.0, 15.0]);
        assert_eq!(cfg.points().iter().map(|s| s.n_pilots).collect::<Vec<_>>(), vec![24, 50]);
        assert_eq!(cfg.info_bits_for(&cfg.points()[0]), 267);
        assert_eq!(cfg.echo()["master_seed"], "7");
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::parse("n_trials = 0\n").is_err());
        assert!(ExperimentConfig::parse("estimators = \n").is_err());
        assert!(ExperimentConfig::parse("estimators = Foo\n").is_err());
        assert!(ExperimentConfig::parse("bogus = 1\n").is_err());
        assert!(ExperimentConfig::parse("sweep = grid\n").is_err());
        assert!(ExperimentConfig::parse("estimators = OMP, omp\n").is_err());
    }

    #[test]
    fn estimator_names_round_trip() {
        for e in Estimator::ALL {
            assert_eq!(e.name().parse::<Estimator>().unwrap(), e);
        }
    }
}
