//! Batch front end: model files, command dispatch and deterministic reports.
//!
//! Exit codes: 0 on success, 1 when the library rejects the request
//! (printed as `error[Code]: message`), 2 on unreadable input.

mod commands;
pub mod model;
pub mod report;

use std::ffi::OsString;

use clap::Parser;

pub use commands::{execute, Cli, CliError, Command};
pub use model::{Model, ModelFile};
pub use report::{Mode, Report};

/// Everything a CLI invocation produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn failure(err: &CliError) -> Outcome {
        Outcome {
            code: err.exit_code(),
            stdout: String::new(),
            stderr: format!("error[{}]: {}\n", err.code(), err.message()),
        }
    }
}

/// Parses `args` (program name first) and runs the command.
///
/// When `preloaded` is given it is used instead of the `-m` file.
pub fn run_with<I, T>(args: I, preloaded: Option<&Model>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let loaded;
    let model = match (preloaded, &cli.model) {
        (Some(m), _) => m,
        (None, Some(path)) => match Model::from_path(path) {
            Ok(m) => {
                loaded = m;
                &loaded
            }
            Err(e) => {
                return Outcome::failure(&CliError::Input {
                    code: e.code().to_string(),
                    message: e.to_string(),
                })
            }
        },
        (None, None) => {
            return Outcome::failure(&CliError::Input {
                code: "Input".into(),
                message: "a model file is required (-m FILE)".into(),
            })
        }
    };
    let mode = if cli.float { Mode::Float } else { Mode::Exact };
    match execute(model, &cli.command, mode) {
        Ok(report) => Outcome {
            code: 0,
            stdout: if cli.json {
                report.to_json(mode)
            } else {
                report.to_text(mode)
            },
            stderr: String::new(),
        },
        Err(e) => Outcome::failure(&e),
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, None)
}
