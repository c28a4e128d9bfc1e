use std::path::PathBuf;
use std::process::ExitCode;

use chernoff_lab::cli::{self, ExperimentConfig, ExperimentKind};
use chernoff_lab::experiments::configure_threads_from_env;
use chernoff_lab::Error;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "chernoff-lab",
    version,
    about = "Convergence experiments for Chernoff approximations"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the family, function and rate catalogs.
    List,
    /// Write a template config for an experiment kind.
    Init {
        kind: String,
        /// Write to this file instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Error curves and fitted rates for one family.
    Rates(ConfigArg),
    /// Side-by-side error curves for several families.
    Compare(ConfigArg),
    /// Slow-convergence lower bound for a perturbed shift.
    Slow(ConfigArg),
    /// Tangency residuals and norm growth.
    Tangency(ConfigArg),
    /// Moment matching against the heat kernel.
    Moments(ConfigArg),
    /// Approximation-subspace probe over several times.
    Subspace(ConfigArg),
    /// Triangle-inequality check on a linear combination.
    Linearity(ConfigArg),
}

#[derive(clap::Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

fn run_kind(kind: ExperimentKind, arg: &ConfigArg) -> Result<(), Error> {
    let config = ExperimentConfig::load(&arg.config)?;
    if config.kind != kind {
        return Err(Error::Usage(format!(
            "config {} describes a `{}` experiment, not `{kind}`",
            arg.config.display(),
            config.kind
        )));
    }
    let out = cli::run(&config)?;
    println!("wrote {}", out.csv.display());
    println!("wrote {}", out.report.display());
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = configure_threads_from_env().and_then(|_| match &args.command {
        Command::List => {
            print!("{}", cli::catalog_listing());
            Ok(())
        }
        Command::Init { kind, output } => {
            let json = ExperimentConfig::template(ExperimentKind::parse(kind)?).to_json();
            match output {
                Some(path) => std::fs::write(path, json + "\n").map_err(Error::from),
                None => {
                    println!("{json}");
                    Ok(())
                }
            }
        }
        Command::Rates(a) => run_kind(ExperimentKind::Rates, a),
        Command::Compare(a) => run_kind(ExperimentKind::Compare, a),
        Command::Slow(a) => run_kind(ExperimentKind::Slow, a),
        Command::Tangency(a) => run_kind(ExperimentKind::Tangency, a),
        Command::Moments(a) => run_kind(ExperimentKind::Moments, a),
        Command::Subspace(a) => run_kind(ExperimentKind::Subspace, a),
        Command::Linearity(a) => run_kind(ExperimentKind::Linearity, a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Usage(_)) => {
            eprintln!("chernoff-lab: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("chernoff-lab: {e}");
            ExitCode::FAILURE
        }
    }
}
