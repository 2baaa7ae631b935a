//! `hfpquad` command-line front end.

pub mod output;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::error::HfpError;
use crate::harness::{convergence_table, empirical_rate, ConvergenceReport, HarnessCase};
use crate::ie_solver::{
    build_advanced_system, build_simple_system, manufactured_rhs, solve_collocation, Approach, PeriodicKernel,
};
use crate::oracles::{default_interval, poisson_u, Profile, ThetaCase, TrigPolynomial};
use crate::quadrature::{roundoff_floor, t_hat, Evaluator, RulePath, RuleSpec};
use output::{csv, fmt_e16, to_canonical_json, Cell};

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "HFPQUAD_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Hfp(#[from] HfpError),
    #[error("JSON serialization failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Config(String),
}

#[derive(Debug, Parser)]
#[command(name = "hfpquad", version, about = "Finite-part quadrature for periodic integrands")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one rule value.
    Quad(QuadArgs),
    /// Error table over a range of n.
    Table(TableArgs),
    /// Fitted ln-error slope per eta.
    Rate(TableArgs),
    /// Solve the manufactured integral equation.
    SolveIe(SolveArgs),
    /// Print the roundoff floor K(n)·u·n².
    Floor(FloorArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Poisson density with a closed-form value.
    EtaOracle,
    /// Trigonometric polynomial from --cos/--sin.
    UserModes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PathArg {
    Compact,
    Generic,
}

impl From<PathArg> for RulePath {
    fn from(p: PathArg) -> Self {
        match p {
            PathArg::Compact => RulePath::Compact,
            PathArg::Generic => RulePath::Generic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ApproachArg {
    Simple,
    Advanced,
}

impl From<ApproachArg> for Approach {
    fn from(a: ApproachArg) -> Self {
        match a {
            ApproachArg::Simple => Approach::Simple,
            ApproachArg::Advanced => Approach::Advanced,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CaseArgs {
    #[arg(long, default_value_t = 3)]
    pub m: u32,
    #[arg(long, value_enum, default_value_t = Family::EtaOracle)]
    pub family: Family,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long = "period", visible_alias = "T", default_value_t = 2.0 * PI)]
    pub period: f64,
    /// a_0, a_1, … for --family user-modes
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub cos: Vec<f64>,
    /// b_1, b_2, … for --family user-modes
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub sin: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct QuadArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    #[arg(long, default_value_t = 0)]
    pub s: u32,
    #[arg(long)]
    pub n: usize,
    /// Defaults to compact when the (m, s) pair has one.
    #[arg(long, value_enum)]
    pub path: Option<PathArg>,
    /// Also report the error against the oracle.
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub eta: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub s: u32,
    /// start:stop:step (inclusive) or a comma list.
    #[arg(long, value_parser = parse_n_list)]
    pub n: NList,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value_t = ApproachArg::Simple)]
    pub approach: ApproachArg,
    /// Simple: 4n unknowns. Advanced: n unknowns, n even.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Manufactured solution poisson_u(eta, x).
    #[arg(long, default_value_t = 0.3)]
    pub eta: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FloorArgs {
    #[arg(long, value_parser = parse_n_list)]
    pub n: NList,
    #[arg(long, default_value_t = 1.0)]
    pub gnorm: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gpnorm: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gpppnorm: f64,
    #[arg(long = "period", visible_alias = "T", default_value_t = 2.0 * PI)]
    pub period: f64,
    #[arg(long, default_value_t = f64::EPSILON / 2.0)]
    pub u: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NList(pub Vec<usize>);

/// `start:stop:step` inclusive, `a,b,c`, or a single value.
pub fn parse_n_list(s: &str) -> Result<NList, String> {
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("bad n '{v}': {e}"));
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let (start, stop, step) = match parts.as_slice() {
            [a, b] => (parse(a)?, parse(b)?, 1),
            [a, b, c] => (parse(a)?, parse(b)?, parse(c)?),
            _ => return Err(format!("range must be start:stop[:step], got '{s}'")),
        };
        if step == 0 || start > stop {
            return Err(format!("empty range '{s}'"));
        }
        return Ok(NList((start..=stop).step_by(step).collect()));
    }
    let v = s.split(',').map(parse).collect::<Result<Vec<_>, _>>()?;
    Ok(NList(v))
}

fn theta_case(args: &CaseArgs, eta: f64) -> Result<ThetaCase, CliError> {
    let (a, b) = default_interval(args.t, args.period);
    let profile = match args.family {
        Family::EtaOracle => Profile::poisson(eta)?,
        Family::UserModes => {
            if args.cos.is_empty() && args.sin.is_empty() {
                return Err(CliError::Config("--family user-modes needs --cos and/or --sin".into()));
            }
            Profile::Trig(TrigPolynomial::new(args.period, args.cos.clone(), args.sin.clone())?)
        }
    };
    Ok(ThetaCase::new(args.m, args.t, a, b, profile)?)
}

fn emit(out: &OutputArgs, text: &str) -> Result<String, CliError> {
    if let Some(path) = &out.output {
        std::fs::write(path, text).map_err(|source| HfpError::Io { path: path.clone(), source })?;
        Ok(String::new())
    } else {
        Ok(text.to_string())
    }
}

#[derive(Debug, Serialize)]
struct QuadRecord {
    m: u32,
    s: u32,
    n: usize,
    t: f64,
    path: RulePath,
    value: f64,
    oracle: Option<f64>,
    error: Option<f64>,
}

fn cmd_quad(args: &QuadArgs) -> Result<String, CliError> {
    let m = args.case.m;
    let spec = match args.path {
        Some(p) => RuleSpec::new(m, args.s, args.n, p.into())?,
        None => RuleSpec::preferred(m, args.s, args.n)?,
    };
    let case = theta_case(&args.case, args.eta)?;
    let integrand = case.integrand(m as usize + 1)?;
    let value = t_hat(&spec, &integrand)?;
    let oracle = if args.oracle {
        Some(HarnessCase::new(case, args.s).oracle()?.1)
    } else {
        None
    };
    let record = QuadRecord {
        m,
        s: args.s,
        n: args.n,
        t: args.case.t,
        path: spec.path,
        value,
        oracle,
        error: oracle.map(|o| (value - o).abs()),
    };
    let text = match args.out.format {
        Format::Json => to_canonical_json(&record)?,
        Format::Csv => {
            let mut header = vec!["m", "s", "n", "t", "value"];
            let mut row = vec![
                Cell::Int(m as i64),
                Cell::Int(args.s as i64),
                Cell::Int(args.n as i64),
                Cell::Float(args.case.t),
                Cell::Float(value),
            ];
            if let (Some(o), Some(e)) = (record.oracle, record.error) {
                header.extend(["oracle", "error"]);
                row.extend([Cell::Float(o), Cell::Float(e)]);
            }
            csv(&header, &[row])
        }
    };
    emit(&args.out, &text)
}

fn reports(args: &TableArgs) -> Result<Vec<ConvergenceReport>, CliError> {
    let etas = match args.case.family {
        Family::EtaOracle => args.eta.clone(),
        Family::UserModes => vec![0.0],
    };
    // validate every combination before computing anything
    let cases = etas
        .iter()
        .map(|&eta| {
            for &n in &args.n.0 {
                RuleSpec::preferred(args.case.m, args.s, n)?;
            }
            Ok(HarnessCase::new(theta_case(&args.case, eta)?, args.s))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(cases
        .iter()
        .map(|c| convergence_table(c, &args.n.0))
        .collect::<Result<Vec<_>, _>>()?)
}

fn eta_label(r: &ConvergenceReport) -> String {
    r.case.eta.map_or_else(String::new, |e| format!("(eta={e})"))
}

fn cmd_table(args: &TableArgs) -> Result<String, CliError> {
    let reports = reports(args)?;
    let text = match args.out.format {
        Format::Json => to_canonical_json(&reports)?,
        Format::Csv => {
            let single = reports.len() == 1;
            let mut header = vec!["n".to_string()];
            for r in &reports {
                let label = if single { String::new() } else { eta_label(r) };
                header.push(format!("value{label}"));
                header.push(format!("error{label}"));
            }
            let rows: Vec<Vec<Cell>> = (0..args.n.0.len().min(reports[0].rows.len()))
                .map(|i| {
                    let mut row = vec![Cell::Int(reports[0].rows[i].n as i64)];
                    for r in &reports {
                        row.push(Cell::Float(r.rows[i].value));
                        row.push(Cell::Float(r.rows[i].error));
                    }
                    row
                })
                .collect();
            csv(&header, &rows)
        }
    };
    emit(&args.out, &text)
}

#[derive(Debug, Serialize)]
struct RateRecord {
    eta: Option<f64>,
    s: u32,
    fitted_rate: f64,
    rows_used: usize,
    floor_dominated: bool,
    report: ConvergenceReport,
}

fn cmd_rate(args: &TableArgs) -> Result<String, CliError> {
    let records = reports(args)?
        .into_iter()
        .map(|report| {
            let fit = empirical_rate(&report)?;
            Ok(RateRecord {
                eta: report.case.eta,
                s: report.case.s,
                fitted_rate: fit.slope,
                rows_used: fit.rows_used,
                floor_dominated: fit.floor_dominated,
                report,
            })
        })
        .collect::<Result<Vec<_>, HfpError>>()?;
    let text = match args.out.format {
        Format::Json => to_canonical_json(&records)?,
        Format::Csv => {
            let rows: Vec<Vec<Cell>> = records
                .iter()
                .map(|r| {
                    vec![
                        r.eta.map_or(Cell::Text(String::new()), Cell::Float),
                        Cell::Int(r.s as i64),
                        Cell::Float(r.fitted_rate),
                        Cell::Int(r.rows_used as i64),
                        Cell::Text(r.floor_dominated.to_string()),
                    ]
                })
                .collect();
            csv(&["eta", "s", "fitted_rate", "rows_used", "floor_dominated"], &rows)
        }
    };
    emit(&args.out, &text)
}

#[derive(Debug, Serialize)]
struct SolveRecord {
    approach: Approach,
    n: usize,
    lambda: f64,
    eta: f64,
    grid: Vec<f64>,
    values: Vec<f64>,
    errors: Vec<f64>,
    max_error: f64,
    residual: f64,
    condition: f64,
}

fn cmd_solve_ie(args: &SolveArgs) -> Result<String, CliError> {
    let eta = args.eta;
    poisson_u(eta, 0.0)?;
    let kernel = PeriodicKernel::cos_over_sin_cubed(0.0, 2.0 * PI)?;
    let phi: Evaluator = Arc::new(move |x| poisson_u(eta, x).unwrap_or(f64::NAN));
    let rhs = manufactured_rhs(&kernel, phi.clone(), args.lambda, 8);
    let w = |x: f64| rhs.value(x);
    let approach: Approach = args.approach.into();
    let system = match approach {
        Approach::Simple => build_simple_system(&kernel, w, args.lambda, args.n)?,
        Approach::Advanced => build_advanced_system(&kernel, w, args.lambda, args.n)?,
    };
    let sol = solve_collocation(&system)?;
    let errors: Vec<f64> = sol.grid.iter().zip(&sol.values).map(|(&x, v)| (v - phi(x)).abs()).collect();
    let record = SolveRecord {
        approach,
        n: args.n,
        lambda: args.lambda,
        eta,
        max_error: errors.iter().copied().fold(0.0, f64::max),
        errors,
        grid: sol.grid,
        values: sol.values,
        residual: sol.residual,
        condition: sol.condition,
    };
    let text = match args.out.format {
        Format::Json => to_canonical_json(&record)?,
        Format::Csv => {
            let rows: Vec<Vec<Cell>> = record
                .grid
                .iter()
                .zip(&record.values)
                .zip(&record.errors)
                .map(|((&x, &v), &e)| vec![Cell::Float(x), Cell::Float(v), Cell::Float(e)])
                .collect();
            eprintln!(
                "max_error={} residual={} condition={}",
                fmt_e16(record.max_error),
                fmt_e16(record.residual),
                fmt_e16(record.condition)
            );
            csv(&["x", "phi_hat", "error"], &rows)
        }
    };
    emit(&args.out, &text)
}

#[derive(Debug, Serialize)]
struct FloorRow {
    n: usize,
    floor: f64,
}

fn cmd_floor(args: &FloorArgs) -> Result<String, CliError> {
    let norms = [args.gnorm, args.gpnorm, args.gpppnorm];
    if norms.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(CliError::Config("norms must be finite and >= 0".into()));
    }
    if !(args.u > 0.0 && args.period > 0.0) {
        return Err(CliError::Config("--u and --period must be > 0".into()));
    }
    let rows: Vec<FloorRow> = args
        .n
        .0
        .iter()
        .map(|&n| FloorRow {
            n,
            floor: roundoff_floor(args.gnorm, args.gpnorm, args.gpppnorm, args.period, n, args.u),
        })
        .collect();
    let text = match args.out.format {
        Format::Json => to_canonical_json(&rows)?,
        Format::Csv => {
            let cells: Vec<Vec<Cell>> = rows
                .iter()
                .map(|r| vec![Cell::Int(r.n as i64), Cell::Float(r.floor)])
                .collect();
            csv(&["n", "floor"], &cells)
        }
    };
    emit(&args.out, &text)
}

/// Runs one command and returns what goes to stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Quad(a) => cmd_quad(a),
        Command::Table(a) => cmd_table(a),
        Command::Rate(a) => cmd_rate(a),
        Command::SolveIe(a) => cmd_solve_ie(a),
        Command::Floor(a) => cmd_floor(a),
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(&cli)) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
