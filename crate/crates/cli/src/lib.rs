//! Library side of the `ris-sizer` command: argument parsing, run
//! configuration, artifact writers and the subcommands themselves.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::io::Write;

use clap::Parser;

pub use config::Cli;
pub use error::{CliError, CliResult};

/// Runs one parsed command, writing human-readable output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    use config::{Command, RunConfig};
    match &cli.command {
        Command::ListUsecases(a) => commands::list_usecases(a, out),
        Command::Sweep(a) => commands::sweep(&RunConfig::resolve(a)?, out),
        Command::Size(a) => commands::size(&RunConfig::resolve(a)?, out),
        Command::Pdf(a) => commands::pdf(&RunConfig::resolve(a)?, out),
        Command::Replay(a) => commands::replay(a, out),
    }
}

/// Parses `args` (program name first) and runs the command. Returns the exit
/// code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
