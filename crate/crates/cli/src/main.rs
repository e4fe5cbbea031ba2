use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use absum_cli::config::{Command, ExperimentConfig, Scale};
use absum_cli::verify::VerifyOptions;
use absum_cli::{run, CliError};
use clap::Parser;

/// Environment variable with the default worker count.
const THREADS_ENV: &str = "ABSUM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "absum", version, about = "Absolute almost weighted summability experiments")]
struct Args {
    command: Command,
    /// Experiment config (JSON). Optional for verify-all.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for CSV side files.
    #[arg(long)]
    csv_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; overrides the config and ABSUM_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    scale: Option<Scale>,
    /// Multiplies the second term-recovery coefficient (defect injection).
    #[arg(long, hide = true)]
    perturb_recovery: Option<f64>,
}

fn threads(args: &Args, cfg: &ExperimentConfig) -> Result<Option<usize>, CliError> {
    let env = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| CliError::Config(format!("{THREADS_ENV}={v} is not a count")))?),
        Err(_) => None,
    };
    let n = args.threads.or(cfg.threads).or(env);
    if n == Some(0) {
        return Err(CliError::Config("thread count must be at least 1".into()));
    }
    Ok(n)
}

fn execute(args: Args) -> Result<Option<String>, CliError> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if args.command == Command::VerifyAll => ExperimentConfig::new(Command::VerifyAll),
        None => return Err(CliError::Config(format!("{} needs --config", args.command.as_str()))),
    };
    if cfg.command != args.command {
        return Err(CliError::Config(format!(
            "config is for `{}`, command line asks for `{}`",
            cfg.command.as_str(),
            args.command.as_str()
        )));
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if args.scale.is_some() {
        cfg.scale = args.scale;
    }
    let output = cfg.output.clone().unwrap_or_default();
    let out = args.out.clone().or(output.report);
    let csv_dir = args.csv_dir.clone().or(output.csv_dir);
    let opts = VerifyOptions { recovery_scale: args.perturb_recovery.unwrap_or(1.0) };

    let pool = match threads(&args, &cfg)? {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;

    let start = Instant::now();
    let mut outcome = pool.install(|| run(cfg, opts))?;
    outcome.report.set_elapsed(start.elapsed());

    if let Some(dir) = &csv_dir {
        std::fs::create_dir_all(dir)?;
        for (name, text) in &outcome.csv {
            std::fs::write(dir.join(name), text)?;
        }
    }
    let json = outcome.report.to_json();
    match &out {
        Some(path) => std::fs::write(path, json)?,
        None => print!("{json}"),
    }
    Ok(outcome.failure)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(args) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) => {
            eprintln!("absum: {}", CliError::Invariant(failure));
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("absum: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
