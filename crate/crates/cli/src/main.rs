//! `twopoint` command-line entry point.

mod cli;
mod commands;
mod config;
mod error;
mod files;
mod tables;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};
use config::RunConfig;

fn run(cli: Cli) -> error::Result<()> {
    let mut cfg = RunConfig::load_or_default(cli.config.as_deref())?;
    match cli.command {
        Command::Synth(a) => commands::synth(&mut cfg, a),
        Command::Train(a) => commands::train(&mut cfg, a),
        Command::Eval(a) => commands::eval(&mut cfg, a),
        Command::Sweep(a) => commands::sweep(&mut cfg, a),
        Command::Track(a) => commands::track(&mut cfg, a),
        Command::Serve(a) => commands::serve(&mut cfg, a),
        Command::Report(a) => commands::report(a),
        Command::Dsp(a) => commands::dsp(a),
    }
}

fn fail(category: &str, message: &str, code: u8) -> ExitCode {
    let one_line = message.split_whitespace().collect::<Vec<_>>().join(" ");
    eprintln!("error[{category}]: {one_line}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp_millis()
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            return fail("usage", first, 2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.category(), &e.to_string(), e.exit_code() as u8),
    }
}

