mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, CliConfig, Command};
use commands::{exit_code, Failure};

fn run(cli: Cli) -> Result<String, Failure> {
    let config_failure = |e: mlkit::error::Error| Failure {
        code: exit_code(&e),
        message: format!("configure: {e}"),
    };
    match cli.command {
        Command::Analyze(args) => {
            commands::analyze(&CliConfig::from_data_args(&args).map_err(config_failure)?)
        }
        Command::Train(args) => commands::train(&CliConfig::merge(&args).map_err(config_failure)?),
        Command::Evaluate(args) => commands::evaluate(&args),
        Command::Predict(args) => commands::predict(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(4),
            };
        }
    };
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code as u8)
        }
    }
}
