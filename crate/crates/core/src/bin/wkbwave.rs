use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wkbwave::cli::{configure_threads, run, Command};

/// WKB and spectral solvers for planar waves in separable media.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Eigenpairs of the discretized h₂ with mapped frequencies.
    Eigen(Paths),
    /// Time-domain fields by WKB superposition or the spectral propagator.
    Propagate(Paths),
    /// First-order mode function of a Lorentzian inhomogeneity.
    Lorentz(Paths),
    /// Monotonicity and WKB validity checks only.
    Validate(Paths),
}

#[derive(clap::Args)]
struct Paths {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (command, paths) = match args.command {
        Sub::Eigen(p) => (Command::Eigen, p),
        Sub::Propagate(p) => (Command::Propagate, p),
        Sub::Lorentz(p) => (Command::Lorentz, p),
        Sub::Validate(p) => (Command::Validate, p),
    };
    let result = configure_threads().and_then(|_| run(command, &paths.config, &paths.out));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("wkbwave {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
