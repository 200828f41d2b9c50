mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{eval, inspect, parse, train};

/// Tree-fragment grammar toolkit: train fragment tables from bracketed
/// treebanks, parse with a two-pass CKY searcher, score with PARSEVAL.
#[derive(Parser)]
#[command(name = "treegram", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract fragments from a treebank and write a model file
    Train(train::TrainArgs),
    /// Parse sentences (one per line) into bracketed trees
    Parse(parse::ParseArgs),
    /// Score test parses against gold trees
    Eval(eval::EvalArgs),
    /// Dump model contents
    Inspect(inspect::InspectArgs),
}

/// Exit codes: 0 success, 1 internal error, 2 usage or I/O error.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Internal(String),
}

impl CliError {
    pub fn io(context: &str, e: std::io::Error) -> Self {
        CliError::Usage(format!("{context}: {e}"))
    }
}

pub type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(args) => train::run(args),
        Command::Parse(args) => parse::run(args),
        Command::Eval(args) => eval::run(args),
        Command::Inspect(args) => inspect::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
