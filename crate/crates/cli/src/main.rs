use std::process::ExitCode;

use clap::Parser;
use emonet_cli::args::Cli;

fn main() -> ExitCode {
    match emonet_cli::run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.stage.exit_code())
        }
    }
}
