//! The `seedlex` command line.
//!
//! Exit status is 0 on success, 1 for usage errors and 2 for data errors.
//! Results go to stdout or `--out`; diagnostics go to stderr.

pub mod args;
mod commands;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, CrowdCommand};
use commands::Session;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    if cli.quiet {
        log::set_max_level(log::LevelFilter::Error);
    }
    let mut ctx = Session { seed: cli.seed, quiet: cli.quiet, format: cli.format, stdout, stderr };
    let result = match &cli.command {
        Command::Train(a) => commands::train_cmd(&mut ctx, a),
        Command::Neighbors(a) => commands::neighbors_cmd(&mut ctx, a),
        Command::Generate(a) => commands::generate_cmd(&mut ctx, a),
        Command::Analyze(a) => commands::analyze_cmd(&mut ctx, a),
        Command::Compare(a) => commands::compare_cmd(&mut ctx, a),
        Command::Agree(a) => commands::agree_cmd(&mut ctx, a),
        Command::Crowd(CrowdCommand::Export(a)) => commands::export_cmd(&mut ctx, a),
        Command::Crowd(CrowdCommand::Import(a)) => commands::import_cmd(&mut ctx, a),
        Command::Crowd(CrowdCommand::Aggregate(a)) => commands::aggregate_cmd(&mut ctx, a),
        Command::Serve(a) => commands::serve_cmd(&mut ctx, a),
    };
    match result.and_then(|()| Ok(ctx.stdout.flush()?)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(ctx.stderr, "error: {e:#}");
            EXIT_DATA
        }
    }
}
