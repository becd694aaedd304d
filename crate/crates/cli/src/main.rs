//! `homsim`: overlap, dip, visibility, optimization and validation runs of
//! the HOM interference model.
//!
//! Exit codes: 0 success, 1 model error, 2 configuration error,
//! 3 validation failure.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hom_core::experiment::{ExperimentError, Method};

use config::{Format, RunConfig};

#[derive(Parser)]
#[command(
    name = "homsim",
    version,
    about = "Hong-Ou-Mandel interference between a heralded photon and a weak coherent pulse"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; the built-in operating point when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output file; overrides `output` in the configuration. Stdout if neither.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    #[arg(long, global = true, value_enum)]
    method: Option<MethodArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Effective spectral widths, V(0) and the implied dip width.
    Overlap,
    /// Coincidence probability over the delay grid, with a Gaussian fit.
    Dip,
    /// Dip visibility, plus the two-photon and classical references.
    Visibility,
    /// Mean photon number that maximizes the closed-form visibility.
    Optimize,
    /// Invariant and oracle-agreement checks at the configured point.
    Validate,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Closed,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        CliError::Model(e.to_string())
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(_) | CliError::Io(_) => 1,
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let config = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::builtin(),
    };
    let format = match cli.common.format {
        Some(FormatArg::Json) => Format::Json,
        Some(FormatArg::Csv) => Format::Csv,
        None => config.format.unwrap_or(Format::Json),
    };
    let method = cli.common.method.map(|m| match m {
        MethodArg::Exact => Method::Exact,
        MethodArg::Closed => Method::ClosedForm,
    });
    let out = cli.common.out.clone().or_else(|| config.output.clone());
    let is_dip = matches!(cli.command, Command::Dip);
    if format == Format::Csv && !is_dip {
        return Err(CliError::Config(
            "csv output holds a dip curve; use it with `dip`".into(),
        ));
    }

    let outcome = match cli.command {
        Command::Overlap => commands::overlap(&config)?,
        Command::Dip => commands::dip(&config, method)?,
        Command::Visibility => commands::visibility_cmd(&config, method)?,
        Command::Optimize => commands::optimize(&config, method)?,
        Command::Validate => commands::validate(&config)?,
    };

    let body = match format {
        Format::Json => outcome.json,
        Format::Csv => outcome.csv.expect("dip produces a curve"),
    };
    match &out {
        Some(path) => {
            report::write_atomic(path, &body)?;
            for line in &outcome.summary {
                println!("{line}");
            }
        }
        None => {
            for line in &outcome.summary {
                eprintln!("{line}");
            }
            print!("{body}");
        }
    }
    if !outcome.failed.is_empty() {
        eprintln!("failing checks: {}", outcome.failed.join(", "));
        return Ok(false);
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("homsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
