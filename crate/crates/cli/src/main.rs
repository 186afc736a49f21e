mod batch;
mod report;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use antihankel::{compare_spectra, solve, HankelParams};
use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use batch::parse_batch;
use report::{oracle_of, BenchReport, BenchRow, CompareReport, Fixed, OracleReport, Report, SolveReport, VerifyReport};

/// Convergence threshold handed to the Jacobi oracle.
pub const ORACLE_TOL: f64 = 1e-14;
const DEFAULT_BENCH_N: usize = 510;
const EXIT_COMPARE_FAILED: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Solve,
    Oracle,
    Compare,
    Verify,
    Bench,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Eigenvalues and eigenvectors of anti-tridiagonal Hankel matrices.
#[derive(Debug, Parser)]
#[command(name = "antihankel", version)]
struct Cli {
    mode: Mode,
    /// Matrix size is n + 2. Defaults to 510 in bench mode.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    /// Root tolerance of the secular solver.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Largest eigenvalue difference accepted by compare mode.
    #[arg(long, default_value_t = 1e-7)]
    tol_compare: f64,
    #[arg(long)]
    vectors: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// File of `n a b c` lines, one instance each.
    #[arg(long)]
    batch: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
struct Failure {
    kind: &'static str,
    message: String,
}

impl Failure {
    fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Failure { kind, message: message.into() }
    }
}

impl From<antihankel::Error> for Failure {
    fn from(e: antihankel::Error) -> Self {
        Failure::new(e.kind(), e.to_string())
    }
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
}

#[derive(Serialize)]
struct ErrorObject<'a> {
    error: ErrorBody<'a>,
}

fn error_json(f: &Failure, line: Option<usize>) -> serde_json::Value {
    serde_json::to_value(ErrorObject { error: ErrorBody { kind: f.kind, message: &f.message, line } })
        .expect("error object serializes")
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("ANTIHANKEL_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::new("invalid_environment", format!("ANTIHANKEL_THREADS must be a count, got `{raw}`")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::new("invalid_environment", e.to_string()))?;
    }
    Ok(())
}

fn params_from_flags(cli: &Cli) -> Result<HankelParams, Failure> {
    let n = match (cli.n, cli.mode) {
        (Some(n), _) => n,
        (None, Mode::Bench) => DEFAULT_BENCH_N,
        (None, _) => return Err(Failure::new("usage", "--n is required")),
    };
    let coefficient =
        |v: Option<f64>, name: &str| v.ok_or_else(|| Failure::new("usage", format!("--{name} is required")));
    Ok(HankelParams::new(n, coefficient(cli.a, "a")?, coefficient(cli.b, "b")?, coefficient(cli.c, "c")?)?)
}

fn run_one(cli: &Cli, params: &HankelParams) -> Result<Report, Failure> {
    Ok(match cli.mode {
        Mode::Solve => Report::Solve(SolveReport::new(&solve(params, cli.tol, cli.vectors)?)),
        Mode::Oracle => Report::Oracle(OracleReport::new(params, &oracle_of(params)?, cli.vectors)),
        Mode::Compare => {
            let result = solve(params, cli.tol, cli.vectors)?;
            let oracle = oracle_of(params)?.values;
            let cmp = compare_spectra(&result.values(), &oracle)?;
            Report::Compare(CompareReport::new(&result, &oracle, &cmp, cli.tol_compare))
        }
        Mode::Verify => Report::Verify(VerifyReport::new(params, &oracle_of(params)?.values)),
        Mode::Bench => {
            let rows =
                antihankel::bench::sweep(params.size(), params.a(), params.b(), params.c(), cli.tol, cli.vectors)?;
            Report::Bench(BenchReport {
                a: Fixed(params.a()),
                b: Fixed(params.b()),
                c: Fixed(params.c()),
                tol: Fixed(cli.tol),
                rows: rows.iter().map(BenchRow::from).collect(),
            })
        }
    })
}

/// One CSV document. `instance` prefixes each row with its 1-based instance number.
fn write_csv(reports: &[(usize, &Report)], header: &[&str], batch: bool) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_failure = |e: csv::Error| Failure::new("io", e.to_string());
    let mut full: Vec<&str> = Vec::new();
    if batch {
        full.push("instance");
    }
    full.extend_from_slice(header);
    w.write_record(&full).map_err(io_failure)?;
    for (instance, report) in reports {
        for row in report.csv_rows() {
            let mut record = Vec::with_capacity(row.len() + 1);
            if batch {
                record.push(instance.to_string());
            }
            record.extend(row);
            w.write_record(&record).map_err(io_failure)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Failure::new("io", e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::new("io", e.to_string()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Ok,
    CompareFailed,
    InstanceFailed,
}

impl Status {
    fn of(pass: bool) -> Self {
        if pass {
            Status::Ok
        } else {
            Status::CompareFailed
        }
    }
}

/// The rendered document and the exit status it implies.
fn render(cli: &Cli) -> Result<(String, Status), Failure> {
    if cli.tol_compare.is_nan() || cli.tol_compare < 0.0 {
        return Err(Failure::new("usage", format!("--tol-compare must be non-negative, got {}", cli.tol_compare)));
    }
    let Some(path) = &cli.batch else {
        let report = run_one(cli, &params_from_flags(cli)?)?;
        let text = match cli.format {
            Format::Json => to_json(&report),
            Format::Csv => write_csv(&[(1, &report)], report.csv_header(), false)?,
        };
        return Ok((text, Status::of(report.pass())));
    };

    if cli.mode == Mode::Bench {
        return Err(Failure::new("usage", "bench mode does not take --batch"));
    }
    let text = fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))?;
    let lines =
        parse_batch(&text).map_err(|e| Failure::new("batch_format", format!("line {}: {}", e.line, e.message)))?;
    let results: Vec<Result<Report, Failure>> = lines.par_iter().map(|l| run_one(cli, &l.params)).collect();

    if let Some((line, failure)) = lines.iter().zip(&results).find_map(|(l, r)| r.as_ref().err().map(|f| (l.line, f))) {
        if cli.format == Format::Csv {
            return Err(Failure::new(failure.kind, format!("line {line}: {}", failure.message)));
        }
    }
    let pass = results.iter().all(|r| r.as_ref().is_ok_and(Report::pass));
    let text = match cli.format {
        Format::Json => {
            let docs: Vec<serde_json::Value> = lines
                .iter()
                .zip(&results)
                .map(|(l, r)| match r {
                    Ok(report) => serde_json::to_value(report).expect("reports serialize"),
                    Err(f) => error_json(f, Some(l.line)),
                })
                .collect();
            to_json(&docs)
        }
        Format::Csv => {
            let reports: Vec<(usize, &Report)> =
                results.iter().enumerate().filter_map(|(i, r)| r.as_ref().ok().map(|r| (i + 1, r))).collect();
            let header =
                reports.first().map(|(_, r)| r.csv_header()).unwrap_or(&["index", "value", "kind", "residual"]);
            write_csv(&reports, header, true)?
        }
    };
    let status = if results.iter().all(Result::is_ok) { Status::of(pass) } else { Status::InstanceFailed };
    Ok((text, status))
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::new("io", format!("{}: {e}", path.display()))),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::new("io", e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            let failure = Failure::new("usage", message.trim_end());
            print!("{}", to_json(&error_json(&failure, None)));
            return ExitCode::from(EXIT_ERROR);
        }
    };

    let outcome = configure_threads().and_then(|()| render(&cli));
    match outcome {
        Ok((text, status)) => {
            if let Err(f) = emit(cli.out.as_ref(), &text) {
                print!("{}", to_json(&error_json(&f, None)));
                return ExitCode::from(EXIT_ERROR);
            }
            match status {
                Status::Ok => ExitCode::SUCCESS,
                Status::CompareFailed => ExitCode::from(EXIT_COMPARE_FAILED),
                Status::InstanceFailed => ExitCode::from(EXIT_ERROR),
            }
        }
        Err(f) => {
            let text = to_json(&error_json(&f, None));
            if emit(cli.out.as_ref(), &text).is_err() {
                print!("{text}");
            }
            ExitCode::from(EXIT_ERROR)
        }
    }
}
