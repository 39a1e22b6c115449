//! Command-line front end: verification suites, flow integration and export,
//! phase portraits, classification and curvature-norm tables.
//!
//! Exit codes: `0` success, `1` a check failed (or a run violated its
//! acceptance bound), `2` usage or parameter error.

pub mod errata;
pub mod output;
pub mod parse;
pub mod suite;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use twistor_core::flow::{classify, integrate, ricci_map, Event, Horizon, IntegrateOptions, Sample};
use twistor_core::round::norm_table;
use twistor_core::twistor::canonical_ricci;
use twistor_core::{Error, Family, FamilyPoint, FlowTrajectory};

use crate::errata::Errata;
use crate::parse::{parse_horizon, parse_range, parse_rational, render_rational, Range};
use crate::suite::{run_suite, Model, ReportDocument, Suite};

/// Relative invariant drift every emitted trajectory must stay under.
pub const DRIFT_BOUND: f64 = 1e-8;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "twistor",
    version,
    about = "Exact twistor-space curvature checks and Ricci-flow dynamics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Cy,
    Canonical,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Cy => Family::Cy,
            FamilyArg::Canonical => Family::Canonical,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run verification suites and emit a report.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Restrict model-dependent checks to one base model (default: both).
        #[arg(long, value_enum)]
        model: Option<Model>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Exact Ricci tensor of a family metric, as a point of the same family.
    Ricci {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, value_parser = parse_rational)]
        mu: BigRational,
    },
    /// Integrate the flow from (mu, rho) at t = 0 and export the trajectory.
    Flow {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        /// Backward end of the span (<= 0).
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t0: f64,
        /// Forward end of the span: a time >= 0, or `end` to run to the terminal event.
        #[arg(long, default_value = "end", value_parser = parse_horizon, allow_negative_numbers = true)]
        t1: Horizon,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// CSV destination; without it the CSV goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trajectories over a grid of initial conditions.
    Portrait {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// `a:b:n` grid in mu.
        #[arg(long, value_parser = parse_range)]
        mu_range: Range,
        /// `a:b:n` grid in rho.
        #[arg(long, value_parser = parse_range)]
        rho_range: Range,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t0: f64,
        #[arg(long, default_value = "end", value_parser = parse_horizon, allow_negative_numbers = true)]
        t1: Horizon,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regime and asymptotic limits of the trajectory through (mu, 1).
    Classify {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        mu: f64,
    },
    /// Exact |Rm|² and |∇Rm|² of the round-base metric at the given λ.
    Curvnorm {
        /// Comma-separated rationals, e.g. `1,2,1/2`.
        #[arg(long, value_delimiter = ',', value_parser = parse_rational, required = true)]
        lambdas: Vec<BigRational>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonPositiveParameter { .. }
            | Error::InvalidOption(_)
            | Error::RicciNotPositive(_)
            | Error::ZeroSubstitution => EXIT_USAGE,
            _ => EXIT_FAIL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: EXIT_FAIL,
            message: e.to_string(),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure {
            code: EXIT_FAIL,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure {
            code: EXIT_FAIL,
            message: e.to_string(),
        }
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match command {
        Command::Verify { suite, model, format } => verify(suite, model, format, out),
        Command::Ricci { family, mu } => ricci(family.into(), &mu, out),
        Command::Flow {
            family,
            mu,
            rho,
            t0,
            t1,
            tol,
            out: path,
        } => flow(
            FamilyPoint::new(family.into(), mu, rho),
            options(t0, t1, tol),
            path.as_deref(),
            out,
        ),
        Command::Portrait {
            family,
            mu_range,
            rho_range,
            t0,
            t1,
            tol,
            out: path,
        } => portrait(family.into(), &mu_range, &rho_range, &options(t0, t1, tol), &path, out),
        Command::Classify { family, mu } => {
            let record = classify(family.into(), mu)?;
            writeln!(out, "{}", serde_json::to_string(&record)?)?;
            Ok(EXIT_OK)
        }
        Command::Curvnorm { lambdas, out: path } => curvnorm(&lambdas, path.as_deref(), out),
    }
}

fn options(t0: f64, t1: Horizon, tol: f64) -> IntegrateOptions {
    IntegrateOptions {
        t0,
        t1,
        rel_tol: tol,
        ..IntegrateOptions::default()
    }
}

fn verify(suite: Suite, model: Option<Model>, format: Format, out: &mut dyn Write) -> Result<i32, Failure> {
    let doc = ReportDocument::build(suite, model, run_suite(suite, model), &Errata::builtin());
    match format {
        Format::Json => writeln!(out, "{}", doc.to_json())?,
        Format::Text => write!(out, "{}", doc.to_text())?,
    }
    Ok(doc.exit_code)
}

#[derive(Serialize)]
struct RationalPair {
    mu: String,
    rho: String,
}

#[derive(Serialize)]
struct Coefficients {
    vertical: String,
    horizontal: String,
}

#[derive(Serialize)]
struct RicciOutput {
    family: Family,
    mu: String,
    /// `Ric(g) = ρ' g'` with `g'` in the same family.
    ricci: RationalPair,
    coefficients: Coefficients,
}

fn ricci(family: Family, mu: &BigRational, out: &mut dyn Write) -> Result<i32, Failure> {
    let image = ricci_map(&FamilyPoint::new(
        family,
        mu.clone(),
        BigRational::from_integer(1.into()),
    ))?;
    let (vertical, horizontal) = match family {
        Family::Cy => twistor_core::flow::metric_ricci_coefficients(mu)?,
        Family::Canonical => canonical_ricci(mu)?,
    };
    let doc = RicciOutput {
        family,
        mu: render_rational(mu),
        ricci: RationalPair {
            mu: render_rational(&image.mu),
            rho: render_rational(&image.rho),
        },
        coefficients: Coefficients {
            vertical: render_rational(&vertical),
            horizontal: render_rational(&horizontal),
        },
    };
    writeln!(out, "{}", serde_json::to_string(&doc)?)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct FlowSummary<'a> {
    family: Family,
    mu0: f64,
    rho0: f64,
    samples: usize,
    first: Option<&'a Sample>,
    last: Option<&'a Sample>,
    events: &'a [Event],
    max_drift: f64,
    rel_tol: f64,
    out: String,
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| Failure {
        code: EXIT_FAIL,
        message: format!("cannot create {}: {e}", path.display()),
    })
}

fn flow(p: FamilyPoint<f64>, opts: IntegrateOptions, path: Option<&Path>, out: &mut dyn Write) -> Result<i32, Failure> {
    let traj = integrate(&p, &opts)?;
    let Some(path) = path else {
        output::write_trajectory(out, &traj)?;
        return Ok(EXIT_OK);
    };
    output::write_trajectory(create(path)?, &traj)?;
    let summary = FlowSummary {
        family: p.family,
        mu0: p.mu,
        rho0: p.rho,
        samples: traj.samples.len(),
        first: traj.samples.first(),
        last: traj.samples.last(),
        events: &traj.events,
        max_drift: traj.max_drift,
        rel_tol: traj.rel_tol,
        out: path.display().to_string(),
    };
    writeln!(out, "{}", serde_json::to_string(&summary)?)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct PortraitSummary {
    family: Family,
    trajectories: usize,
    max_drift: f64,
    /// Seeds whose run exceeded the drift bound; their rows are not emitted.
    rejected: Vec<usize>,
    out: String,
}

fn portrait(
    family: Family,
    mu: &Range,
    rho: &Range,
    opts: &IntegrateOptions,
    path: &Path,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let grid: Vec<(usize, f64, f64)> = mu
        .values()
        .into_iter()
        .flat_map(|m| rho.values().into_iter().map(move |r| (m, r)))
        .enumerate()
        .map(|(seed, (m, r))| (seed, m, r))
        .collect();
    let runs: Vec<(usize, f64, f64, FlowTrajectory)> = grid
        .par_iter()
        .map(|&(seed, m, r)| integrate(&FamilyPoint::new(family, m, r), opts).map(|t| (seed, m, r, t)))
        .collect::<Result<_, Error>>()?;
    let (kept, rejected): (Vec<_>, Vec<_>) = runs.into_iter().partition(|run| run.3.max_drift < DRIFT_BOUND);
    output::write_portrait(create(path)?, &kept)?;
    let summary = PortraitSummary {
        family,
        trajectories: kept.len(),
        max_drift: kept.iter().map(|run| run.3.max_drift).fold(0.0, f64::max),
        rejected: rejected.iter().map(|run| run.0).collect(),
        out: path.display().to_string(),
    };
    writeln!(out, "{}", serde_json::to_string(&summary)?)?;
    Ok(if rejected.is_empty() { EXIT_OK } else { EXIT_FAIL })
}

fn curvnorm(lambdas: &[BigRational], path: Option<&Path>, out: &mut dyn Write) -> Result<i32, Failure> {
    let rows = norm_table(lambdas)?;
    match path {
        Some(path) => output::write_norm_table(create(path)?, &rows)?,
        None => output::write_norm_table(out, &rows)?,
    }
    Ok(EXIT_OK)
}
