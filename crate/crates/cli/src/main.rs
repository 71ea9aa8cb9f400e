mod args;
mod commands;
mod error;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn main() {
    let json_errors = std::env::args().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion)
                || !json_errors
            {
                e.exit();
            }
            let err = CliError::Usage(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            std::process::exit(err.exit_code());
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Solve(a) => commands::solve(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Bench(a) => commands::bench(a),
        Command::Count(a) => commands::count(a),
    };
    if let Err(err) = result {
        if cli.json_errors {
            eprintln!("{}", err.to_json());
        } else {
            eprintln!("error: {err}");
        }
        std::process::exit(err.exit_code());
    }
}
