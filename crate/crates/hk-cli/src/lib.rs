//! Front end for the `hk` toolkit: argument model, dispatch, and the JSON
//! envelope shared by every subcommand.

pub mod commands;
pub mod input;
pub mod suite;

use clap::{Args, Parser, Subcommand};
use hk::series::DEFAULT_TRUNC;
use hk::{FieldSpec, HkError};
use serde_json::{json, Value};
use thiserror::Error;

/// Bumped whenever a field of the JSON envelope or a report changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Hk(#[from] HkError),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "cli.parse",
            CliError::Usage(_) => "cli.usage",
            CliError::Io { .. } => "cli.io",
            CliError::Hk(e) => e.code(),
        }
    }
}

macro_rules! via_hk {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Hk(e.into())
            }
        })*
    };
}

via_hk!(
    hk::field::FieldError,
    hk::exponents::ExponentError,
    hk::diagrams::DiagramError,
    hk::series::SeriesError,
    hk::division::DivisionError,
    hk::stdbasis::StdBasisError,
    hk::stanley::StanleyError,
    hk::jacobians::JacobianError,
    hk::resolution::ResolutionError
);

#[derive(Debug, Parser)]
#[command(name = "hk", version, about = "Exact local algebra: staircases, standard bases, Stanley decompositions, resultants, resolution")]
pub struct Cli {
    /// Coefficient field: `q` or `fp:<p>`.
    #[arg(long, global = true, default_value = "q")]
    pub field: FieldSpec,
    /// Truncation degree for power series.
    #[arg(long, global = true, default_value_t = DEFAULT_TRUNC, value_parser = clap::value_parser!(u32).range(1..))]
    pub trunc: u32,
    /// Seed for every randomized step; `HK_SEED` takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Emit the versioned JSON envelope instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decomposition and Hilbert-Samuel function of a monomial staircase.
    Diagram(DiagramArgs),
    /// Divide by series with prescribed initial exponents.
    Divide(DivideArgs),
    /// Initial diagram and reduced standard basis of an ideal at the origin.
    Stdbasis(IdealArgs),
    /// Hilbert-Samuel function of an ideal at a point.
    Hilbert(HilbertArgs),
    /// Stanley decomposition of a graded module.
    Stanley(StanleyArgs),
    /// Generalized Jacobian determinants, or the resultant of forms.
    Jacobian(JacobianArgs),
    /// Resolve a marked ideal by blow-ups.
    Resolve(ResolveArgs),
    /// Resolve and replay the trace, or check a basis along the Samuel stratum.
    Verify(VerifyArgs),
    /// Run the fixed-seed reproducibility suite.
    Suite,
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    /// Vertices, e.g. `(2,0),(0,3)`.
    #[arg(long)]
    pub vertices: String,
    /// Last `s` of the reported Hilbert-Samuel profile (default: `d(Δ)+n+1`).
    #[arg(long)]
    pub s_max: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DivideArgs {
    /// Divisors, comma-separated or `@file`; repeatable.
    #[arg(long = "divisor", required = true)]
    pub divisors: Vec<String>,
    /// Dividend.
    pub dividend: String,
    /// Monomial order on the main variables, e.g. `x1+x2; x2`.
    #[arg(long)]
    pub order: Option<String>,
    /// Number of main variables (inferred from names when absent).
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IdealArgs {
    /// Generators, comma-separated or `@file`.
    #[arg(long)]
    pub ideal: String,
    #[arg(long)]
    pub order: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Move to coordinates where the diagram is monotone first.
    #[arg(long)]
    pub generic: bool,
}

#[derive(Debug, Args)]
pub struct HilbertArgs {
    #[arg(long)]
    pub ideal: String,
    /// Point, e.g. `0,1/2`; the origin when absent.
    #[arg(long)]
    pub point: Option<String>,
    #[arg(long, default_value_t = 8)]
    pub s_max: u32,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StanleyArgs {
    /// Module presentation as inline JSON or `@file`:
    /// `{"n": 2, "rank": 1, "relations": [["x^2"]]}`.
    #[arg(long)]
    pub module: String,
    /// Compare against brute force up to this degree.
    #[arg(long)]
    pub bound: Option<u32>,
}

#[derive(Debug, Args)]
pub struct JacobianArgs {
    /// Functions, comma-separated or `@file`.
    #[arg(long)]
    pub functions: String,
    /// One exponent per function; required unless `--resultant`.
    #[arg(long)]
    pub alphas: Option<String>,
    #[arg(long)]
    pub point: Option<String>,
    /// Largest `s` in the determinant table (default: `d(Δ)+1`).
    #[arg(long)]
    pub s_max: Option<u32>,
    /// Include the matrices themselves.
    #[arg(long)]
    pub matrices: bool,
    /// Treat the functions as forms and report their resultant.
    #[arg(long)]
    pub resultant: bool,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ResolveArgs {
    #[arg(long)]
    pub ideal: String,
    #[arg(long, default_value_t = 1)]
    pub mu: u32,
    /// Exceptional coordinates, by name or 1-based index.
    #[arg(long)]
    pub e: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub max_blowups: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub max_charts: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub marked: ResolveArgs,
    /// Skip the Hilbert-Samuel probes (for ideals that are not reduced varieties).
    #[arg(long)]
    pub skip_variety: bool,
    /// Check `--ideal` as a basis with these vertices instead of resolving.
    #[arg(long)]
    pub alphas: Option<String>,
    /// Points for the basis check, `;`-separated.
    #[arg(long)]
    pub points: Option<String>,
}

/// Resolved run parameters shared by all subcommands.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub field: FieldSpec,
    pub trunc: u32,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let seed = match std::env::var("HK_SEED") {
            Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("HK_SEED `{v}` is not a u64")))?,
            Err(_) => cli.seed,
        };
        Ok(RunConfig { field: cli.field, trunc: cli.trunc, seed })
    }
}

/// Result of one subcommand: the JSON payload, its text rendering, and
/// whether every check it ran passed.
#[derive(Debug, Clone)]
pub struct Report {
    pub result: Value,
    pub text: Vec<String>,
    pub ok: bool,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Diagram(_) => "diagram",
            Command::Divide(_) => "divide",
            Command::Stdbasis(_) => "stdbasis",
            Command::Hilbert(_) => "hilbert",
            Command::Stanley(_) => "stanley",
            Command::Jacobian(_) => "jacobian",
            Command::Resolve(_) => "resolve",
            Command::Verify(_) => "verify",
            Command::Suite => "suite",
        }
    }
}

pub fn run(command: &Command, cfg: &RunConfig) -> Result<Report, CliError> {
    match command {
        Command::Diagram(a) => commands::diagram(a),
        Command::Divide(a) => commands::divide(a, cfg),
        Command::Stdbasis(a) => commands::stdbasis(a, cfg),
        Command::Hilbert(a) => commands::hilbert(a, cfg),
        Command::Stanley(a) => commands::stanley(a, cfg),
        Command::Jacobian(a) => commands::jacobian(a, cfg),
        Command::Resolve(a) => commands::resolve(a, cfg),
        Command::Verify(a) => commands::verify(a, cfg),
        Command::Suite => Ok(suite::run_suite(cfg.seed)),
    }
}

pub fn envelope(command: &str, cfg: &RunConfig, outcome: &Result<Report, CliError>) -> Value {
    let mut out = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "field": cfg.field.to_string(),
        "trunc": cfg.trunc,
        "seed": cfg.seed,
    });
    match outcome {
        Ok(report) => {
            out["ok"] = json!(report.ok);
            out["result"] = report.result.clone();
        }
        Err(e) => {
            out["ok"] = json!(false);
            out["error"] = json!({"code": e.code(), "message": e.to_string()});
        }
    }
    out
}
