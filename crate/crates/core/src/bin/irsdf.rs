use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use irsdf::ao::Scheme;
use irsdf::harness::{load_config, preset, run_sweep, write_results, ExperimentConfig};

/// Monte-Carlo sum-rate sweeps for IRS-assisted decode-and-forward relaying.
#[derive(Parser, Debug)]
#[command(name = "irsdf", version)]
struct Args {
    /// TOML experiment file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Built-in experiment.
    #[arg(long, value_parser = ["fig2a", "fig2b", "fig2c", "desk"])]
    preset: Option<String>,

    /// Override the number of trials per sweep point.
    #[arg(long)]
    trials: Option<usize>,

    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Comma separated scheme list, e.g. `proposed,relay_only`.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,

    /// Output directory for raw.csv and summary.csv.
    #[arg(long, default_value = "results")]
    out: PathBuf,

    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn build_config(args: &Args) -> irsdf::Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => preset("desk")?,
    };
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.base_seed = s;
    }
    if let Some(s) = &args.schemes {
        cfg.schemes = s.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = match args.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let cfg = match build_config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let (var, values) = cfg.sweep_points();
    log::info!(
        "{} trials x {} values of {} x {} schemes",
        cfg.trials,
        values.len(),
        var.name(),
        cfg.schemes.len()
    );

    let results = match run_sweep(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let failures = results.iter().filter(|r| r.error.is_some()).count();
    if failures > 0 {
        eprintln!("warning: {failures} trial runs failed");
    }
    let summary = match write_results(&results, &args.out) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };

    println!(
        "{:<12} {:>4} {:>10} {:>8} {:>9}",
        "scheme",
        var.name(),
        "mean",
        "se",
        "feasible"
    );
    for row in summary {
        println!(
            "{:<12} {:>4} {:>10.4} {:>8.4} {:>5}/{}",
            row.scheme, row.sweep_value, row.mean_sum_rate, row.se_sum_rate, row.feasible_count, row.trials
        );
    }
    println!("wrote {}", args.out.display());
    ExitCode::SUCCESS
}
