//! `freeterm`: generate, analyze, minimize and simulate semiautomata with
//! state queries.

mod analyze;
mod cli;
mod gen;
mod io;
mod simulate;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};
use io::Failure;

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let result = match &cli.command {
        Command::Gen(args) => gen::run(args, &cli.global),
        Command::Analyze(args) => analyze::run_analyze(args, &cli.global),
        Command::Minimize(args) => analyze::run_minimize(args, &cli.global),
        Command::Check(args) => analyze::run_check(args, &cli.global),
        Command::Simulate(args) => simulate::run(args, &cli.global),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
