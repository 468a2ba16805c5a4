//! `sqtwist`: twist sets, density reports, parallelepiped search and
//! certificates from the command line.
//!
//! Exit status: 0 on success, 1 when a search comes back empty or a
//! certificate is invalid, 2 on usage or input errors.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "sqtwist", version, about = "Square-class subspaces of positive-rank quadratic twists")]
struct Cli {
    /// Worker threads for the twist-set computation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the witnessed twist set of a curve and write it as a set file.
    Sieve(commands::SieveArgs),
    /// Exponential sums, smoothed and lower densities, and inequality checks.
    Density(commands::DensityArgs),
    /// Search a set file for strict parallelepipeds.
    Find(commands::FindArgs),
    /// Twist set, parallelepiped and certificate in one run.
    Certify(commands::CertifyArgs),
    /// Recheck a certificate file.
    Verify(commands::VerifyArgs),
    /// Inequalities of the inductive step for one window.
    Diagnose(commands::DiagnoseArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads == Some(0) {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Sieve(a) => commands::sieve(a, cli.threads),
        Command::Density(a) => commands::density(a),
        Command::Find(a) => commands::find(a),
        Command::Certify(a) => commands::certify(a, cli.threads),
        Command::Verify(a) => commands::verify(a),
        Command::Diagnose(a) => commands::diagnose(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
