use std::process::ExitCode;

use clap::Parser;

use bprepair_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            ExitCode::from(outcome.status.code())
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.status.code())
        }
    }
}

