//! `aacs`: batch front-end writing CSV and JSON artifacts.

mod check;
mod commands;
mod options;

use std::process::ExitCode;

use clap::Parser;

use options::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.message);
            if let Some(report) = &e.report {
                eprintln!("{report}");
            }
            ExitCode::from(e.code)
        }
    }
}
