//! The `csie` command line: ingestion of end-of-day files, CSIE and IE
//! series, entropy betas, screening, annual backtests, synthetic fixtures
//! and scatter plots. Every command writes a run manifest next to its output.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 numeric error.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;
pub mod num;
pub mod report;
pub mod specfile;
pub mod svg;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::{Cli, Command, Common};
pub use crate::error::{CliError, Result};

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Ingest(a) => &a.common,
            Command::Csie(a) => &a.common,
            Command::Ie(a) => &a.common,
            Command::Betas(a) => &a.common,
            Command::Screen(a) => &a.common,
            Command::Backtest(a) => &a.common,
            Command::Generate(a) => &a.common,
            Command::Plot(a) => &a.common,
        }
    }
}

fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Csie(a) => commands::csie(a),
        Command::Ie(a) => commands::ie(a),
        Command::Betas(a) => commands::betas(a),
        Command::Screen(a) => commands::screen(a),
        Command::Backtest(a) => commands::backtest(a),
        Command::Generate(a) => commands::generate(a),
        Command::Plot(a) => commands::plot(a),
    }
}

/// Runs the command line given by `argv`, program name included.
pub fn run(argv: Vec<OsString>) -> Result<()> {
    let argv = manifest::expand_config(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.render().to_string().trim_end().to_string())),
    };
    match cli.command.common().threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(|| dispatch(&cli.command)),
        None => dispatch(&cli.command),
    }
}
