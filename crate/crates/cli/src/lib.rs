//! Command-line entry points and the HTTP detection service.

pub mod args;
pub mod commands;
pub mod detector;
pub mod error;
pub mod service;

use std::ffi::OsString;
use std::io::Write;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;

pub use args::{Cli, Command};
pub use detector::{load_table, load_tables_dir, Detector};
pub use error::{CliError, CliResult};
pub use service::{handle_detect, router, DetectRequest, ServiceState, SharedState};

/// Parses `argv`, runs the subcommand and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Generate(a) => print_json(&commands::generate(&a)?),
        Command::DeriveLabels(a) => print_json(&commands::derive_labels(&a)?),
        Command::Train(a) => print_json(&commands::train(&a)?),
        Command::Detect(a) => print_json(&commands::detect(&a)?),
        Command::Eval(a) => print_json(&commands::eval(&a)?),
        Command::Serve(a) => serve(a),
    }
}

fn print_json(value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Validation(e.to_string()))?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| CliError::io("<stdout>", e))
}

fn serve(args: args::ServeArgs) -> CliResult<()> {
    let detector = Detector::load(args.model.as_deref())?;
    let cfg = args.matching.resolve(detector.base_config())?;
    let tables = match &args.tables_dir {
        Some(dir) => load_tables_dir(dir)?,
        None => Vec::new(),
    };
    let n_tables = tables.len();
    let state = Arc::new(ServiceState::new(detector, tables, cfg).with_ui_dir(args.ui_dir.clone()));
    let addr = format!("{}:{}", args.host, args.port);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::io("<runtime>", e))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr).await.map_err(|e| CliError::io(&addr, e))?;
        eprintln!("ambiq: {} detector, {n_tables} tables, listening on http://{addr}", state.detector.name());
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::io(&addr, e))
    })
}
