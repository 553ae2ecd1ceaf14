use std::path::PathBuf;
use std::process::ExitCode;

use cca_harness::{experiments, write_report, Config, HarnessError};
use clap::Parser;

/// Run a named credit-attribution experiment.
#[derive(Parser, Debug)]
#[command(name = "cca-lab", version)]
struct Args {
    /// rr_boost | cca_audit | boost_learn | reduction_demo | svm_demo
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave the generation time out of the written files.
    #[arg(long)]
    no_timestamp: bool,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cca-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: &Args) -> Result<(), HarnessError> {
    let mut cfg = Config::from_path(&args.config)?;
    if let Some(t) = args.trials {
        cfg.set("trials", t);
    }
    if let Some(s) = args.seed {
        cfg.set("seed", s);
    }
    let report = experiments::run(&args.experiment, &cfg)?;
    let dir = args
        .out
        .clone()
        .or_else(|| cfg.out().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    for path in write_report(&report, &dir, &args.experiment, !args.no_timestamp)? {
        println!("wrote {}", path.display());
    }
    for c in &report.checks {
        println!("{} {}: {}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    let failed = report.failed_checks();
    if !failed.is_empty() {
        let names: Vec<&str> = failed.iter().map(|c| c.name.as_str()).collect();
        return Err(HarnessError::Assertion(names.join(", ")));
    }
    Ok(())
}
