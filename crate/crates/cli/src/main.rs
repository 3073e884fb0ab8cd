mod args;
mod commands;
mod error;
mod settings;
mod svg;

use std::fs;

use clap::Parser;
use serde_json::json;

use crate::args::{Cli, Command};
use crate::error::{exit, CliError};
use crate::settings::Settings;

const WORKERS_ENV: &str = "ABFLOW_WORKERS";

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
            let _ = e.print();
            return code;
        }
    };
    match configure_workers().and_then(|()| execute(&cli.command)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n = raw
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "{WORKERS_ENV} must be a positive integer, got {raw:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))
}

fn execute(command: &Command) -> Result<i32, CliError> {
    let settings = Settings::resolve(command.flags())?;
    let outcome = commands::run(command, &settings)?;

    let mut artifacts: Vec<String> = Vec::new();
    if settings.out.is_some() {
        artifacts.extend(outcome.files.iter().map(|a| a.name.clone()));
        if settings.format.json() {
            artifacts.push("summary.json".to_string());
        }
    }
    let summary = json!({
        "command": command.name(),
        "units": commands::units(&settings),
        "params": commands::params_record(&settings),
        "result": outcome.result,
        "artifacts": artifacts,
    });
    let text = serde_json::to_string_pretty(&summary).expect("plain data serializes");

    if let Some(dir) = &settings.out {
        fs::create_dir_all(dir)?;
        for a in &outcome.files {
            fs::write(dir.join(&a.name), &a.bytes)?;
        }
        if settings.format.json() {
            fs::write(dir.join("summary.json"), format!("{text}\n"))?;
        }
    }
    println!("{text}");
    Ok(if outcome.failed {
        exit::VERIFICATION_FAILED
    } else {
        exit::OK
    })
}
