use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use fourphoton_cli::{configure_threads, execute, CliError, RunConfig};

fn run(config: &RunConfig) -> Result<(), CliError> {
    configure_threads()?;
    let bytes = execute(config)?;
    match &config.output {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let config = RunConfig::parse();
    match run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
