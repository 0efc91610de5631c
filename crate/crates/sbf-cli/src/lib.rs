//! Library side of the `sbf` command-line tool, so the commands can be
//! driven from tests without spawning a process.

pub mod args;
pub mod commands;
pub mod verify;

use args::{Cli, Command};
use sbf::Error;
use std::fmt;

/// An error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub msg: String,
}

impl CliError {
    pub fn input(msg: String) -> Self {
        CliError { code: 2, msg }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Input(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Domain(_)
            | Error::Geometry(_)
            | Error::GridMismatch(_)
            | Error::ZeroMode(_)
            | Error::Degenerate(_)
            | Error::TooLarge(_) => 2,
            Error::Stability(_) | Error::SelfIntersection(_) => 3,
            Error::LinearAlgebra { .. } | Error::SingularSymbol(_) | Error::Singularity(_) | Error::Integration(_) => 1,
        };
        CliError { code, msg: e.to_string() }
    }
}

/// Run one command; `Ok` carries the exit code of a completed run.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let cmd = &cli.command;
    match cmd {
        Command::Multipliers(a) => commands::multipliers(cmd, a),
        Command::Verify(a) => commands::verify(cmd, a),
        Command::Dtn(a) => commands::solve(cmd, a, false),
        Command::Ntd(a) => commands::solve(cmd, a, true),
        Command::Evolve(a) => commands::evolve_cmd(cmd, a),
        Command::Converge(a) => commands::converge(cmd, a),
    }
}
