//! `varlex` command-line runner.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;
use varlex_core::VarlexError;

use args::Cli;
use commands::Status;

const THREADS_VAR: &str = "VARLEX_THREADS";

fn report_error(kind: &str, message: &str) -> ExitCode {
    let body = json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{}", serde_json::to_string_pretty(&body).expect("error serializes"));
    ExitCode::from(1)
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| format!("{THREADS_VAR}={value} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return report_error("usage", e.render().to_string().trim_end()),
    };
    if let Err(message) = configure_threads() {
        return report_error("config", &message);
    }
    match commands::run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(2),
        Err(e) => {
            let kind = e.chain().find_map(|c| c.downcast_ref::<VarlexError>()).map_or("input", VarlexError::kind);
            report_error(kind, &format!("{e:#}"))
        }
    }
}
