use clap::Parser;
use fdehydro::{emit_plots, run_experiment, Experiment, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Run one experiment from a JSON config and write its CSV tables,
/// `summary.json` and SVG plots.
#[derive(Debug, Parser)]
#[command(name = "fdehydro", version)]
struct Args {
    experiment: Experiment,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn run(args: Args) -> Result<bool, fdehydro::CliError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.out_dir = Some(out);
    }
    if let Some(threads) = args.threads {
        cfg.threads = Some(threads);
    }
    let bundle = run_experiment(&cfg, Some(args.experiment))?;
    emit_plots(&bundle)?;
    for c in &bundle.checks {
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    println!("results in {}", bundle.out_dir.display());
    Ok(bundle.passed)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
