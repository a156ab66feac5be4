use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = graphite_cli::cli::Cli::parse();
    match graphite_cli::cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
