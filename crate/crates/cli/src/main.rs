use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use spherekey_cli::args::{Cli, Format};
use spherekey_cli::commands;

const USAGE_ERROR: u8 = 1;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(USAGE_ERROR),
            };
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}

fn execute(cli: &Cli) -> Result<u8, String> {
    let (outcome, output) = commands::run(&cli.command)?;
    outcome.record.check_finite()?;
    let text = match output.format {
        Format::Json => outcome.record.to_json(),
        Format::Csv => outcome.record.to_csv()?,
    };
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())?,
    }
    Ok(outcome.exit_code)
}
