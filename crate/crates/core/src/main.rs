use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use cmc_gap::cli::{execute, Cli, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let written = match &cli.command.output().output {
        Some(path) => std::fs::write(path, &outcome.body).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout()
            .lock()
            .write_all(outcome.body.as_bytes())
            .map_err(|e| format!("cannot write to standard output: {e}")),
    };
    if let Err(msg) = written {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE as u8);
    }
    ExitCode::from(outcome.exit_code as u8)
}
