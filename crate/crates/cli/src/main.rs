use std::process::ExitCode;

use clap::Parser;
use dce_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("dce: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
