//! Monte Carlo experiment driver: per-trial channel, frame and noise draws,
//! every configured estimator on identical data, NMSE / BER / iteration
//! metrics, canonical CSV / JSON output and grouped summaries.

mod config;
mod io;
mod run;
mod summary;

pub use config::{Estimator, ExperimentConfig, OutputFormat, Sweep};
pub use io::{emit, read_records_csv, read_records_json, Metadata, RECORD_COLUMNS};
pub use run::{run_experiment, ExperimentOutput, MetricsRecord, TraceRecord};
pub use summary::{summarize, wilson_interval, SummaryRow};
