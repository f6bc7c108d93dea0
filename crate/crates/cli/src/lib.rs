//! Library side of the `ptel` binary, so the acceptance suite and the
//! integration tests can drive the command line in process.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod commands;
pub mod config;
mod contract;
pub mod error;
pub mod fixtures;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use commands::{dispatch, Cli};
pub use error::{CliError, CliResult, ExitCode};

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    ExitCode::Ok.code()
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    ExitCode::Input.code()
                }
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code.code(),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code().code()
        }
    }
}
