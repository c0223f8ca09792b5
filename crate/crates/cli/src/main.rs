mod args;
mod commands;
mod tau;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use ncpoisson::Error;

use crate::args::Cli;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INVALID_INPUT: u8 = 2;

/// Numerical breakdowns on valid input count as failed checks; everything
/// else is a problem with the input.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Pole(_) | Error::NearZeroDenominator { .. } | Error::Singular { .. }) => EXIT_CHECK_FAILED,
        _ => EXIT_INVALID_INPUT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match commands::run(&cli) {
        Ok(out) => out,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(exit_code(&err));
        }
    };
    let text = out.json + "\n";
    match &cli.output {
        Some(path) => {
            if let Err(err) = fs::write(path, text) {
                eprintln!("error: writing {}: {err}", path.display());
                return ExitCode::from(EXIT_INVALID_INPUT);
            }
        }
        None => {
            // a reader that closed the pipe early is not an error
            let _ = io::stdout().write_all(text.as_bytes());
        }
    }
    if out.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}
