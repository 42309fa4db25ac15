use std::process::ExitCode;

use clap::Parser;
use popgo::cli::{execute, Cli};
use popgo::Error;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout();
    match execute(&cli, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::CheckFailed(_) => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
