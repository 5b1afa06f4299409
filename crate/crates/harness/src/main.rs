use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info};

use kltransfer_harness::bounds::{instance_bounds, write_bounds_csv};
use kltransfer_harness::config::GeneratorSpec;
use kltransfer_harness::roster::{read_instance, write_instance, RawResults};
use kltransfer_harness::{generate_instance, run_roster, ExperimentConfig, Report, Result};

#[derive(Debug, Parser)]
#[command(
    name = "kltransfer",
    version,
    about = "KL-regularized preference learning with reward transfer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an instance with sources and a policy class.
    GenEnv {
        /// JSON with `instance` and `sources` sections (an experiment config works).
        #[arg(long)]
        spec: PathBuf,
        /// Generator seed; overrides the seed in the spec.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every roster algorithm over all trials.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the coverage bounds on an instance.
    Bounds {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild the report from a run directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenEnv { spec, seed, out } => {
            let spec = GeneratorSpec::load(&spec)?;
            let bundle = generate_instance(&spec, seed.unwrap_or(spec.instance.seed))?;
            write_instance(&bundle, &out)?;
            info!(
                "wrote instance with {} sources and {} class members to {}",
                bundle.sources.len(),
                bundle.class.len(),
                out.display()
            );
        }
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run_roster(&cfg, Some(&out))?;
            for s in &report.summaries {
                println!(
                    "{}\tcum_regret={:.4}\tfinal_regret={:.6}",
                    s.algorithm, s.cum_regret, s.final_regret
                );
            }
        }
        Command::Bounds { instance, out } => {
            let bundle = read_instance(&instance)?;
            let reports = instance_bounds(&bundle)?;
            write_bounds_csv(&reports, &out)?;
            let violated = reports.iter().filter(|r| !r.satisfied).count();
            info!("evaluated {} bounds, {violated} violated", reports.len());
        }
        Command::Report { input, out } => {
            let raw = RawResults::read(&input)?;
            Report::from_raw(&raw)?.write(&out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
