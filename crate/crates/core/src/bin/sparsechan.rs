use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sparsechan::harness::{
    emit, read_records_csv, read_records_json, run_experiment, summarize, ExperimentConfig, OutputFormat, Sweep,
};

#[derive(Parser)]
#[command(name = "sparsechan", version, about = "Monte Carlo OFDM channel-estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a key = value config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, default_value = "csv", value_parser = parse_format)]
        format: OutputFormat,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's sweep variable.
        #[arg(long, value_parser = parse_sweep)]
        sweep: Option<Sweep>,
        /// Overrides the config's trial count.
        #[arg(long)]
        trials: Option<usize>,
        /// Exit nonzero if any trial was flagged.
        #[arg(long)]
        strict: bool,
        /// Record estimator wall time (makes output machine dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Aggregate the records of a previous run into summary.csv.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse().map_err(|e: sparsechan::Error| e.to_string())
}

fn parse_sweep(s: &str) -> Result<Sweep, String> {
    s.parse().map_err(|e: sparsechan::Error| e.to_string())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.3e}"))
}

fn summarize_dir(dir: &Path) -> sparsechan::Result<()> {
    let csv_path = dir.join("records.csv");
    let records =
        if csv_path.exists() { read_records_csv(&csv_path)? } else { read_records_json(&dir.join("results.json"))? };
    let rows = summarize(&records);
    let out = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&out).map_err(|e| sparsechan::Error::Io(e.to_string()))?;
    for r in &rows {
        w.serialize(r).map_err(|e| sparsechan::Error::Io(e.to_string()))?;
    }
    w.flush()?;
    println!(
        "{:<14} {:>7} {:>4} {:>4} {:>6} {:>10} {:>10} {:>10} {:>22} {:>6}",
        "estimator", "snr_db", "M", "L", "trials", "nmse_mean", "nmse_med", "ber", "ber_95%", "iters"
    );
    for r in &rows {
        println!(
            "{:<14} {:>7} {:>4} {:>4} {:>6} {:>10.3e} {:>10.3e} {:>10} {:>22} {:>6}",
            r.estimator,
            r.snr_db,
            r.n_pilots,
            r.grid_l,
            r.n_trials,
            r.nmse_mean,
            r.nmse_median,
            fmt_opt(r.ber),
            format!("[{}, {}]", fmt_opt(r.ber_lo), fmt_opt(r.ber_hi)),
            r.iterations_median
        );
    }
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, format, workers, seed, sweep, trials, strict, timing } => {
            (|| -> sparsechan::Result<ExitCode> {
                let text = fs::read_to_string(&config)
                    .map_err(|e| sparsechan::Error::Io(format!("{}: {e}", config.display())))?;
                let mut cfg = ExperimentConfig::parse(&text)?;
                if let Some(s) = seed {
                    cfg.master_seed = s;
                    cfg.scenario.seed = s;
                }
                if let Some(s) = sweep {
                    cfg.sweep = s;
                }
                if let Some(t) = trials {
                    cfg.n_trials = t;
                }
                cfg.timing = timing;
                cfg.validate()?;
                let output = run_experiment(&cfg, workers)?;
                for p in emit(&output, &out, format)? {
                    eprintln!("wrote {}", p.display());
                }
                let flagged = output.flagged();
                if flagged > 0 {
                    eprintln!("{flagged} flagged estimator runs");
                    if strict {
                        return Ok(ExitCode::from(3));
                    }
                }
                Ok(ExitCode::SUCCESS)
            })()
        }
        Command::Summarize { input } => summarize_dir(&input).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
