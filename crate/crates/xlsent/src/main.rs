use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    // XLSENT_LOG ∈ {error, info, debug} controls verbosity.
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("XLSENT_LOG", "error")).init();
    let cli = xlsent::cli::Cli::parse();
    ExitCode::from(xlsent::cli::run(cli))
}
