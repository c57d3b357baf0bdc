mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use swflow_core::checks::Level;

use commands::Failure;

#[derive(Parser)]
#[command(name = "swflow", version, about = "Minimize the discrete Seiberg-Witten functional on a 4-torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Run one minimization experiment described by a JSON file.
    Run { config: PathBuf },
    /// Run the invariant suite; exits 1 if any check fails.
    Check {
        #[arg(long, value_enum, default_value = "fast")]
        level: LevelArg,
        /// Replace the Clifford table with a broken one (negative control).
        #[arg(long, hide = true)]
        corrupt_clifford: bool,
    },
    /// Normalize a saved configuration: Coulomb gauge plus harmonic part in
    /// the fundamental domain. Also writes `<output stem>.report.json`.
    Gaugefix { input: PathBuf, output: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => commands::run(&config),
        Command::Check { level, corrupt_clifford } => {
            let level = match level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            };
            commands::check(level, corrupt_clifford)
        }
        Command::Gaugefix { input, output } => commands::gaugefix(&input, &output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::ChecksFailed(n)) => {
            eprintln!("{n} check(s) failed");
            ExitCode::from(1)
        }
    }
}
