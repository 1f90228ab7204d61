use std::process::ExitCode;

use clap::Parser;
use oamcv_cli::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("oamcv: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
