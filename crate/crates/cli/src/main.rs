use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = fqet_cli::Cli::parse();
    ExitCode::from(fqet_cli::run(&cli))
}
