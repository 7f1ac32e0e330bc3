//! `bqt-bench` command-line front end.
//!
//! Exit codes: 0 on success, 2 for invalid input, 3 for solver failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{gadc_error, isotropic_error, no_resource_error};
use crate::channels::swap_symmetry_report;
use crate::error::{Error, Result};
use crate::json::{parse_channel, parse_state};
use crate::qcore::{BipartiteState, DensityMatrix};
use crate::resources::{gadc_resource_state, isotropic_state, GadcParams, IsotropicParams};
use crate::sdp::{diamond_distance, ppt_simulation_error, SolveStatus};
use crate::verify::{verify_resource, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

pub const CSV_MAGIC: &str = "# bqt-bench v1";
pub const CSV_COLUMNS: [&str; 12] = [
    "kind",
    "d",
    "fidelity",
    "dim_resource",
    "gamma",
    "noise",
    "analytic",
    "sdp",
    "branch",
    "locc_tight",
    "discrepancy",
    "status",
];

const DEFAULT_SEED: u64 = 20_200_813;

#[derive(Debug, Parser)]
#[command(
    name = "bqt-bench",
    version,
    about = "Simulation error of bidirectional teleportation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulation error for a single resource.
    Error {
        #[command(subcommand)]
        resource: ResourceArg,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv, global = true)]
        format: OutputFormat,
    },
    /// Parameter sweep written as CSV or JSON.
    Sweep(SweepArgs),
    /// Rebuild the simulating channel from the witness and check it.
    Verify {
        #[command(subcommand)]
        resource: ResourceArg,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv, global = true)]
        format: OutputFormat,
    },
    /// Half the diamond norm between two channels given as JSON files.
    Diamond { a: PathBuf, b: PathBuf },
    /// Randomized check of the swap covariance `(V (x) U) S = S (U (x) V)`.
    Symmetry {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Analytic,
    Sdp,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum ResourceArg {
    /// No resource: maximally mixed `d x d` state.
    None {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, value_enum, default_value_t = Method::Analytic)]
        method: Method,
    },
    /// Isotropic state of the given fidelity and local dimension.
    Isotropic {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        fidelity: f64,
        #[arg(long = "dim-resource")]
        dim_resource: usize,
        #[arg(long, value_enum, default_value_t = Method::Analytic)]
        method: Method,
    },
    /// Two Bell pairs sent through generalized amplitude damping.
    Gadc {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        noise: f64,
        #[arg(long, value_enum, default_value_t = Method::Analytic)]
        method: Method,
    },
    /// Arbitrary bipartite state from a JSON file; SDP only.
    State {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    None,
    Isotropic,
    Gadc,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(value_enum)]
    pub kind: SweepKind,
    /// Swap dimension, or `start:stop:step` for the `none` sweep.
    #[arg(long, default_value = "2")]
    pub d: String,
    /// `start:stop:step`, or a single value.
    #[arg(long, default_value = "0:1:0.05")]
    pub fidelity: String,
    #[arg(long = "dim-resource", default_value = "2:8:1")]
    pub dim_resource: String,
    #[arg(long, default_value = "0:1:0.1")]
    pub gamma: String,
    #[arg(long, default_value = "0:1:0.1")]
    pub noise: String,
    #[arg(long, value_enum, default_value_t = Method::Analytic)]
    pub method: Method,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Worker threads for SDP points; rows are written in grid order.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

/// Range of values `start, start + step, ..` up to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl AxisRange {
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidProgram(format!("`{s}` is not a number in range `{text}`")))
        };
        let r = match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                AxisRange {
                    start: v,
                    stop: v,
                    step: 1.0,
                }
            }
            [a, b, c] => AxisRange {
                start: num(a)?,
                stop: num(b)?,
                step: num(c)?,
            },
            _ => {
                return Err(Error::InvalidProgram(format!(
                    "range `{text}` is not `start:stop:step`"
                )))
            }
        };
        let ordered = r.step > 0.0 && r.start <= r.stop;
        if !ordered || !r.start.is_finite() || !r.stop.is_finite() {
            return Err(Error::param("range", r.step, "need step > 0 and start <= stop"));
        }
        Ok(r)
    }

    /// Grid values, computed as `start + i step` and rounded to 12 decimals
    /// so that `0:1:0.05` yields exactly the decimal grid.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| {
                let v = self.start + i as f64 * self.step;
                (v * 1e12).round() / 1e12
            })
            .collect()
    }

    fn counts(&self, name: &'static str) -> Result<Vec<usize>> {
        self.values()
            .into_iter()
            .map(|v| {
                if v < 0.0 || v.fract() != 0.0 {
                    Err(Error::param(name, v, "must be a nonnegative integer"))
                } else {
                    Ok(v as usize)
                }
            })
            .collect()
    }
}

/// One computed point.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ResultRow {
    pub kind: String,
    pub d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim_resource: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sdp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub locc_tight: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<f64>,
    pub status: String,
}

/// `%.12g`-style formatting.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..12).contains(&exp) {
        let s = format!("{:.11e}", v);
        let (mant, e) = s.split_once('e').expect("exponent present");
        let mant = trim_zeros(mant);
        return format!("{mant}e{e}");
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, v)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl ResultRow {
    fn record(&self) -> Vec<String> {
        let f = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        vec![
            self.kind.clone(),
            self.d.to_string(),
            f(self.fidelity),
            self.dim_resource.map(|v| v.to_string()).unwrap_or_default(),
            f(self.gamma),
            f(self.noise),
            f(self.analytic),
            f(self.sdp),
            self.branch.clone().unwrap_or_default(),
            self.locc_tight.map(|v| v.to_string()).unwrap_or_default(),
            f(self.discrepancy),
            self.status.clone(),
        ]
    }

    fn finish(&mut self) {
        if let (Some(a), Some(s)) = (self.analytic, self.sdp) {
            self.discrepancy = Some((a - s).abs());
        }
        if self.status.is_empty() {
            self.status = "ok".into();
        }
    }
}

fn status_label(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "ok",
        SolveStatus::NearOptimal => "nearOptimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::NumericalFailure => "numericalFailure",
    }
}

/// Fills the sdp column, or records why it could not be filled.
fn fill_sdp(row: &mut ResultRow, rho: Result<BipartiteState>, d: usize) -> Result<()> {
    let sol = ppt_simulation_error(&rho?, d)?;
    row.status = status_label(sol.status).into();
    if sol.status.is_usable() {
        row.sdp = Some(sol.raw_value);
    }
    Ok(())
}

fn mixed_state(d: usize) -> Result<BipartiteState> {
    BipartiteState::new(d, d, DensityMatrix::maximally_mixed(d * d)?)
}

/// Point in a sweep or a single `error` call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    None {
        d: usize,
    },
    Isotropic {
        d: usize,
        fidelity: f64,
        dim_resource: usize,
    },
    Gadc {
        gamma: f64,
        noise: f64,
    },
}

/// Computes one row. Errors are returned only for invalid parameters; solver
/// trouble is recorded in the status column.
pub fn compute_point(p: Point, method: Method) -> Result<ResultRow> {
    let analytic = method != Method::Sdp;
    let sdp = method != Method::Analytic;
    let mut row = ResultRow::default();
    let outcome = match p {
        Point::None { d } => {
            row.kind = "none".into();
            row.d = d;
            if analytic {
                row.analytic = Some(no_resource_error(d)?);
            }
            if sdp {
                fill_sdp(&mut row, mixed_state(d), d)
            } else {
                Ok(())
            }
        }
        Point::Isotropic {
            d,
            fidelity,
            dim_resource,
        } => {
            row.kind = "isotropic".into();
            row.d = d;
            row.fidelity = Some(fidelity);
            row.dim_resource = Some(dim_resource);
            let params = IsotropicParams::new(fidelity, dim_resource)?;
            if analytic {
                let e = isotropic_error(d, fidelity, dim_resource)?;
                row.analytic = Some(e.value);
                row.branch = Some(e.branch.label().into());
                row.locc_tight = Some(e.locc_tight);
            }
            if sdp {
                fill_sdp(&mut row, Ok(isotropic_state(params)), d)
            } else {
                Ok(())
            }
        }
        Point::Gadc { gamma, noise } => {
            row.kind = "gadc".into();
            row.d = 2;
            row.gamma = Some(gamma);
            row.noise = Some(noise);
            let params = GadcParams::new(gamma, noise)?;
            if analytic {
                row.analytic = Some(gadc_error(gamma, noise)?);
            }
            if sdp {
                fill_sdp(&mut row, Ok(gadc_resource_state(params)), 2)
            } else {
                Ok(())
            }
        }
    };
    match outcome {
        Ok(()) => {}
        Err(e) if e.is_validation() => return Err(e),
        Err(e) => row.status = format!("error: {e}"),
    }
    row.finish();
    Ok(row)
}

pub fn sweep_points(args: &SweepArgs) -> Result<Vec<Point>> {
    let mut points = Vec::new();
    match args.kind {
        SweepKind::None => {
            for d in AxisRange::parse(&args.d)?.counts("d")? {
                points.push(Point::None { d });
            }
        }
        SweepKind::Isotropic => {
            let d = single_count(&args.d, "d")?;
            let fids = AxisRange::parse(&args.fidelity)?.values();
            for dim_resource in AxisRange::parse(&args.dim_resource)?.counts("dim-resource")? {
                for &fidelity in &fids {
                    points.push(Point::Isotropic {
                        d,
                        fidelity,
                        dim_resource,
                    });
                }
            }
        }
        SweepKind::Gadc => {
            let noises = AxisRange::parse(&args.noise)?.values();
            for gamma in AxisRange::parse(&args.gamma)?.values() {
                for &noise in &noises {
                    points.push(Point::Gadc { gamma, noise });
                }
            }
        }
    }
    Ok(points)
}

fn single_count(text: &str, name: &'static str) -> Result<usize> {
    let v = AxisRange::parse(text)?.counts(name)?;
    match v.as_slice() {
        [x] => Ok(*x),
        _ => Err(Error::param(name, v.len() as f64, "expects a single value here")),
    }
}

/// Runs a sweep, returning rows in grid order regardless of `jobs`.
pub fn run_sweep(args: &SweepArgs) -> Result<Vec<ResultRow>> {
    let points = sweep_points(args)?;
    // validate everything up front so a bad grid fails before any solve
    for p in &points {
        compute_point(*p, Method::Analytic)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.max(1))
        .build()
        .map_err(|e| Error::Solver(format!("cannot start worker pool: {e}")))?;
    pool.install(|| points.par_iter().map(|p| compute_point(*p, args.method)).collect())
}

pub fn write_csv<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut out = out;
    writeln!(out, "{CSV_MAGIC}")?;
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in rows {
        w.write_record(r.record()).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SweepJson<'a> {
    format: &'static str,
    rows: &'a [ResultRow],
    max_discrepancy: Option<f64>,
}

fn max_discrepancy(rows: &[ResultRow]) -> Option<f64> {
    rows.iter().filter_map(|r| r.discrepancy).reduce(f64::max)
}

fn write_rows(rows: &[ResultRow], format: OutputFormat, path: Option<&Path>) -> Result<()> {
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => write_csv(&mut buf, rows)?,
        OutputFormat::Json => {
            let doc = SweepJson {
                format: "bqt-bench v1",
                rows,
                max_discrepancy: max_discrepancy(rows),
            };
            serde_json::to_writer_pretty(&mut buf, &doc)?;
            buf.push(b'\n');
        }
    }
    match path {
        Some(p) => fs::write(p, buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}

fn resource_state(r: &ResourceArg) -> Result<(BipartiteState, usize)> {
    match r {
        ResourceArg::None { d, .. } => Ok((mixed_state(*d)?, *d)),
        ResourceArg::Isotropic {
            d,
            fidelity,
            dim_resource,
            ..
        } => Ok((isotropic_state(IsotropicParams::new(*fidelity, *dim_resource)?), *d)),
        ResourceArg::Gadc { gamma, noise, .. } => Ok((gadc_resource_state(GadcParams::new(*gamma, *noise)?), 2)),
        ResourceArg::State { file, d } => Ok((parse_state(&fs::read_to_string(file)?)?, *d)),
    }
}

fn cmd_error(resource: &ResourceArg, format: OutputFormat) -> Result<Vec<ResultRow>> {
    let row = match resource {
        ResourceArg::None { d, method } => compute_point(Point::None { d: *d }, *method)?,
        ResourceArg::Isotropic {
            d,
            fidelity,
            dim_resource,
            method,
        } => compute_point(
            Point::Isotropic {
                d: *d,
                fidelity: *fidelity,
                dim_resource: *dim_resource,
            },
            *method,
        )?,
        ResourceArg::Gadc { gamma, noise, method } => compute_point(
            Point::Gadc {
                gamma: *gamma,
                noise: *noise,
            },
            *method,
        )?,
        ResourceArg::State { d, .. } => {
            let (rho, _) = resource_state(resource)?;
            let mut row = ResultRow {
                kind: "state".into(),
                d: *d,
                ..Default::default()
            };
            fill_sdp(&mut row, Ok(rho), *d)?;
            row.finish();
            row
        }
    };
    let rows = vec![row];
    write_rows(&rows, format, None)?;
    Ok(rows)
}

fn print_verify(r: &VerifyReport, format: OutputFormat) -> Result<()> {
    let mut out = std::io::stdout();
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, r)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "{CSV_MAGIC}")?;
            writeln!(
                out,
                "d,sdp,achieved,discrepancy,p_k,p_l,p_n,max_residual,cpptp,cpptp_min_eigenvalue"
            )?;
            let f = format_float;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.d,
                f(r.sdp_value),
                f(r.achieved_error),
                f(r.discrepancy),
                f(r.probabilities[0]),
                f(r.probabilities[1]),
                f(r.probabilities[2]),
                f(r.max_residual),
                r.cpptp.passed,
                f(r.cpptp.min_eigenvalue)
            )?;
        }
    }
    Ok(())
}

/// Any row whose status is not `ok` after a single-point command means the
/// solver let us down.
fn rows_ok(rows: &[ResultRow]) -> Result<()> {
    match rows.iter().find(|r| r.status != "ok") {
        Some(r) => Err(Error::Solver(r.status.clone())),
        None => Ok(()),
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Error { resource, format } => rows_ok(&cmd_error(resource, *format)?),
        Command::Sweep(args) => {
            let rows = run_sweep(args)?;
            write_rows(&rows, args.format, args.output.as_deref())?;
            let failed = rows.iter().filter(|r| r.status != "ok").count();
            match max_discrepancy(&rows) {
                Some(m) => eprintln!(
                    "{} points, {failed} not ok, max discrepancy {}",
                    rows.len(),
                    format_float(m)
                ),
                None => eprintln!("{} points, {failed} not ok", rows.len()),
            }
            Ok(())
        }
        Command::Verify { resource, format } => {
            let (rho, d) = resource_state(resource)?;
            let r = verify_resource(&rho, d)?;
            print_verify(&r, *format)
        }
        Command::Diamond { a, b } => {
            let a = parse_channel(&fs::read_to_string(a)?)?;
            let b = parse_channel(&fs::read_to_string(b)?)?;
            println!("{}", format_float(diamond_distance(&a, &b)?));
            Ok(())
        }
        Command::Symmetry { d, trials, seed } => {
            let r = swap_symmetry_report(*d, *trials, *seed)?;
            println!(
                "d={d} trials={} seed={seed} max_deviation={} passed={}",
                r.trials,
                format_float(r.max_deviation),
                r.passed
            );
            if r.passed {
                Ok(())
            } else {
                Err(Error::Solver("swap symmetry violated".into()))
            }
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_SOLVER
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("bqt-bench: {e}");
            exit_code(&e)
        }
    }
}
