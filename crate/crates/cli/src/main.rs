//! `qtomo` command-line front end.
//!
//! Exit codes: 0 success, 1 runtime or data failure, 2 usage error.

mod args;
mod chart;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, PovmAction};
use commands::CliError;

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Povm {
            action: PovmAction::Validate { scheme },
        } => {
            let passed = commands::povm_validate(scheme.into())?;
            Ok(if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Reconstruct(a) => commands::reconstruct_one(&a).map(|_| ExitCode::SUCCESS),
        Command::Sweep(a) => commands::sweep(&a).map(|_| ExitCode::SUCCESS),
        Command::Plot(a) => commands::plot(&a).map(|_| ExitCode::SUCCESS),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
