//! `flowlab`: regime classification, phase diagrams and simulations from
//! the command line.
//!
//! Exit codes: 0 success, 1 internal failure or failed self-check, 2 usage
//! or invalid parameters, 3 inconclusive numerics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use args::{Cli, Command};
use commands::CliError;

fn load_config(path: &std::path::Path) -> Result<Command, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

fn output_of(cmd: &Command) -> (Option<args::Format>, Option<&std::path::Path>) {
    match cmd {
        Command::Classify(a) => (a.format, a.output.as_deref()),
        Command::PhaseDiagram(a) => (a.format, a.output.as_deref()),
        Command::SimulateDistance(a) => (a.format, a.output.as_deref()),
        Command::SimulatePair(a) => (a.format, a.output.as_deref()),
        Command::SignDemo(a) => (a.format, a.output.as_deref()),
        Command::ChaosDemo(a) => (a.format, a.output.as_deref()),
        Command::Selfcheck(a) => (a.format, a.output.as_deref()),
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let cmd = match (cli.config, cli.command) {
        (Some(path), None) => load_config(&path)?,
        (None, Some(cmd)) => cmd,
        _ => {
            let _ = Cli::command().print_help();
            return Err(CliError::Usage("give a subcommand or --config".into()));
        }
    };
    let (rendered, status) = commands::run(&cmd)?;
    let (format, path) = output_of(&cmd);
    output::emit(&rendered.render(format), path)?;
    Ok(status.exit_code())
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("flowlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
