#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod error;
mod output;

use args::{Cli, Command, Format};
use error::{CliError, Status};
use output::Rendered;

fn run(cli: &Cli) -> Result<Rendered, CliError> {
    cli.validate()?;
    let exec = cli.exec();
    match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a, exec),
        Command::Converge(a) => commands::converge(a, exec),
        Command::Hsnorm(a) => commands::hsnorm(a, exec),
        Command::Audit(a) => commands::audit(a, exec),
        Command::Eigenpoly(a) => commands::eigenpoly_cmd(a),
        Command::Selftest => commands::selftest(exec),
    }
}

fn emit(cli: &Cli, bytes: &[u8], sidecar: Option<Vec<u8>>) -> Result<(), CliError> {
    match cli.destination() {
        Some(path) => {
            output::write_atomic(&path, bytes)?;
            if let Some(meta) = sidecar {
                output::write_atomic(&output::sidecar(&path), &meta)?;
            }
            Ok(())
        }
        None => std::io::stdout().write_all(bytes).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                Status::ConfigRejected as u8
            } else {
                0
            });
        }
    };
    let config = cli.resolved();
    let outcome = run(&cli).and_then(|r| {
        let bytes = output::render_bytes(cli.format, &config, &r)?;
        let sidecar = match cli.format {
            Format::Csv if cli.destination().is_some() => Some(output::sidecar_bytes(&config, &r)?),
            _ => None,
        };
        emit(&cli, &bytes, sidecar)?;
        Ok(r.status)
    });
    let status = match outcome {
        Ok(s) => s,
        Err(err) => {
            eprintln!("filmspec: {err}");
            // JSON consumers get the failure in the error field
            if cli.format == Format::Json && !matches!(err, CliError::Io { .. }) {
                if let Ok(mut b) = serde_json::to_vec_pretty(&output::error_document(&config, &err)) {
                    b.push(b'\n');
                    if let Err(e) = emit(&cli, &b, None) {
                        eprintln!("filmspec: {e}");
                    }
                }
            }
            err.status()
        }
    };
    ExitCode::from(status as u8)
}
