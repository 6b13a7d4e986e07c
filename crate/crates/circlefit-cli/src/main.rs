//! `circlefit` command-line tool.
//!
//! Three subcommands: `fit` runs the selected methods on a point file,
//! `bench` runs a Monte Carlo experiment from a config file, and `theory`
//! evaluates the theoretical error quantities (KCR bound, essential and
//! full biases) for a sampling geometry.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 degenerate data,
//! 3 numerical failure.

mod pointfile;
mod render;
mod theory;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};

use circlefit::bench::{parse_config, run_experiment, ExperimentReport};
use circlefit::fitter::Registry;
use circlefit::{Error, Method};

#[derive(Parser)]
#[command(name = "circlefit", version, about = "Circle fitting and error-analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Fit circles to a point file (one "x,y" pair per line).
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated list of kasa, pratt, taubin, hyper, geom.
        #[arg(long, default_value = "kasa,pratt,taubin,hyper,geom")]
        methods: String,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Run a Monte Carlo experiment from a key=value config file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        /// Comma-separated point counts; overrides the config's n and
        /// runs the experiment once per value.
        #[arg(long)]
        sweep_n: Option<String>,
    },
    /// Evaluate theoretical quantities for an equally spaced arc.
    Theory {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 180.0)]
        arc_degrees: f64,
        #[arg(long, default_value_t = 0.0)]
        arc_center_degrees: f64,
        #[arg(long)]
        method: String,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::InvalidInput(_) => 1,
            Error::Numerical(_) => 3,
            _ => 2,
        };
        CliError { code, message: err.to_string() }
    }
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(raw) = std::env::var("CIRCLEFIT_THREADS") {
        let threads: usize = raw
            .parse()
            .map_err(|_| CliError::usage(format!("CIRCLEFIT_THREADS: invalid value '{raw}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::usage(format!("failed to configure thread pool: {e}")))?;
    }
    Ok(())
}

fn parse_methods(raw: &str) -> Result<Vec<Method>, CliError> {
    let methods: Vec<Method> = raw
        .split(',')
        .map(|s| s.parse::<Method>())
        .collect::<circlefit::Result<_>>()?;
    if methods.is_empty() {
        return Err(CliError::usage("no methods given"));
    }
    Ok(methods)
}

fn cmd_fit(input: &PathBuf, methods: &str, format: Format) -> Result<(), CliError> {
    let methods = parse_methods(methods)?;
    let text = std::fs::read_to_string(input)
        .map_err(|e| CliError::usage(format!("{}: {e}", input.display())))?;
    let points = pointfile::parse(&text)?;
    if points.len() < 3 {
        return Err(CliError {
            code: 2,
            message: format!("need at least 3 points, got {}", points.len()),
        });
    }
    let registry = Registry::with_defaults();
    let mut records = Vec::with_capacity(methods.len());
    for method in &methods {
        let fit = registry.get(method.name())?.fit(&points)?;
        records.push(render::FitRecord::new(fit, &points));
    }
    print!("{}", render::render_fits(&records, format));
    Ok(())
}

fn parse_sweep(raw: &str) -> Result<Vec<usize>, CliError> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::usage(format!("--sweep-n: invalid count '{s}'")))
        })
        .collect()
}

fn cmd_bench(config: &PathBuf, format: Format, sweep_n: Option<&str>) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config)
        .map_err(|e| CliError::usage(format!("{}: {e}", config.display())))?;
    let base = parse_config(&text)?;
    let sweep = match sweep_n {
        Some(raw) => Some(parse_sweep(raw)?),
        None => None,
    };
    let mut reports: Vec<ExperimentReport> = Vec::new();
    match &sweep {
        None => reports.push(run_experiment(&base)?),
        Some(ns) => {
            for &n in ns {
                let cfg = circlefit::bench::ExperimentConfig { n, ..base.clone() };
                reports.push(run_experiment(&cfg)?);
            }
        }
    }
    print!("{}", render::render_bench(&reports, format, sweep.is_some()));
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit { input, methods, format } => cmd_fit(input, methods, *format),
        Command::Bench { config, format, sweep_n } => {
            cmd_bench(config, *format, sweep_n.as_deref())
        }
        Command::Theory {
            n,
            sigma,
            radius,
            arc_degrees,
            arc_center_degrees,
            method,
            format,
        } => theory::cmd_theory(theory::TheoryArgs {
            n: *n,
            sigma: *sigma,
            radius: *radius,
            arc_degrees: *arc_degrees,
            arc_center_degrees: *arc_center_degrees,
            method: method.parse()?,
            format: *format,
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {}", e.message);
        return ExitCode::from(e.code);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
