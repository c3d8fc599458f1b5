//! Command-line front end for `cflimits`: limit-set reports, figures and
//! regression checks driven by JSON configurations.

pub mod angle;
pub mod config;
pub mod error;
pub mod figure;
pub mod limit;
pub mod output;
pub mod products;
pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "cflimits", version, about = "Limit sets of divergent continued fractions and related products")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Convergence tolerance (overrides the configuration).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Term budget (overrides the configuration).
    #[arg(long = "max-n", global = true)]
    pub max_n: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report the limit set of an elliptic continued fraction.
    LimitSet,
    /// Emit CSV, SVG and a JSON summary for a figure.
    Figure {
        /// fig3, fig4, fig5, fig6 or custom.
        which: Option<String>,
        /// Number of approximants.
        #[arg(long)]
        count: Option<usize>,
        /// Drop approximants with modulus above this value.
        #[arg(long)]
        trim: Option<f64>,
    },
    /// Run identity checks and print a pass/fail table.
    Verify {
        /// Suites to run (default: all).
        suites: Vec<String>,
    },
    /// Limit of a perturbed matrix product relative to the unperturbed one.
    MatrixProduct,
    /// Asymptotic coefficients of a Poincaré-type recurrence.
    Recurrence,
    /// Asymptotics of an (r,s)-matrix continued fraction.
    RsCf,
}

/// Text for standard output and files for the output directory.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub stdout: String,
    pub files: Vec<(String, String)>,
}

fn load_config(cli: &Cli) -> CliResult<Option<ExperimentConfig>> {
    cli.config.as_deref().map(ExperimentConfig::load).transpose()
}

fn require_config(cli: &Cli, command: &str) -> CliResult<ExperimentConfig> {
    load_config(cli)?.ok_or_else(|| CliError::Config(format!("{command} needs --config")))
}

fn wrong_kind(command: &str, cfg: &ExperimentConfig) -> CliError {
    CliError::Config(format!("{command} cannot use a configuration of kind {:?}", cfg.kind()))
}

/// Runs one command, writing its report to `stdout` and its files to
/// `--out` (the current directory for figures when `--out` is absent).
///
/// A failed verification still prints and writes the table before the
/// error is returned.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    let (artifacts, failure) = match &cli.command {
        Command::LimitSet => match require_config(cli, "limit-set")? {
            ExperimentConfig::EllipticCf(c) => (limit::command(&c, cli.tol, cli.max_n)?, None),
            other => return Err(wrong_kind("limit-set", &other)),
        },
        Command::Figure { which, count, trim } => {
            let request = figure::Request { which: which.clone(), count: *count, trim: *trim };
            (figure::command(load_config(cli)?, &request, cli.tol, cli.max_n)?, None)
        }
        Command::Verify { suites } => verify::command(load_config(cli)?, suites, cli.tol, cli.max_n)?,
        Command::MatrixProduct => match require_config(cli, "matrix-product")? {
            ExperimentConfig::MatrixProduct(c) => (products::matrix_product(&c, cli.tol, cli.max_n)?, None),
            other => return Err(wrong_kind("matrix-product", &other)),
        },
        Command::Recurrence => match require_config(cli, "recurrence")? {
            ExperimentConfig::Recurrence(c) => (products::recurrence(&c, cli.tol, cli.max_n)?, None),
            other => return Err(wrong_kind("recurrence", &other)),
        },
        Command::RsCf => match require_config(cli, "rs-cf")? {
            ExperimentConfig::RsCf(c) => (products::rs_cf(&c, cli.tol, cli.max_n)?, None),
            other => return Err(wrong_kind("rs-cf", &other)),
        },
    };
    let out = match (&cli.out, &cli.command) {
        (Some(dir), _) => Some(dir.clone()),
        (None, Command::Figure { .. }) => Some(PathBuf::from(".")),
        (None, _) => None,
    };
    if let Some(dir) = out {
        write_files(&dir, &artifacts.files)?;
    }
    stdout.write_all(artifacts.stdout.as_bytes()).map_err(|e| CliError::io("<stdout>", e))?;
    stdout.flush().map_err(|e| CliError::io("<stdout>", e))?;
    failure.map_or(Ok(()), Err)
}

fn write_files(dir: &Path, files: &[(String, String)]) -> CliResult<()> {
    for (name, contents) in files {
        output::write_atomic(&dir.join(name), contents)?;
    }
    Ok(())
}
