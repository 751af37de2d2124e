//! Command-line front end.
//!
//! All quantities are in natural units with `ħ = 2m = 1`: the kinetic
//! energy is `-Δ`, an energy `E` corresponds to the wavenumber `√E`, and the
//! coupling `alpha` is an inverse length.
//!
//! Exit codes: 0 on success, 2 for invalid flags or parameters outside the
//! supported regime, 3 for numerical failures, failed verification and
//! unwritable output paths.

pub mod emit;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::asymptotics::{
    self, appendix_ladder, fit_exponent, parse_lengths, stage_slopes, sweep, AppendixSettings, Schedule,
    SweepSettings,
};
use crate::delta_model::{DeltaBox, DeltaModel, ModeSpectrum};
use crate::error::Error;
use crate::overlap_engine::{self, Method, OverlapResult, DEFAULT_SERIES_TERMS, DEFAULT_TRUNCATION_MULTIPLIER};
use crate::rank1_lab::{self, MAX_DIMENSION, MIN_DIMENSION};
use emit::{document, format_float, format_optional, to_json_compact, to_json_pretty, write_output, Csv};

/// Environment variable that fixes the size of the worker thread pool.
pub const THREADS_ENV: &str = "DELTAOVERLAP_THREADS";

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;

/// A failed run: the process exit code plus a diagnostic for stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: if e.is_input_error() { EXIT_USAGE } else { EXIT_FAILURE },
            message: e.to_string(),
        }
    }
}

fn parse_finite(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !x.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(x)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let x = parse_finite(s)?;
    if x <= 0.0 {
        return Err(format!("'{s}' must be positive"));
    }
    Ok(x)
}

/// A validated, strictly increasing list of box lengths.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Ladder(pub Vec<f64>);

fn parse_ladder(s: &str) -> Result<Ladder, String> {
    parse_lengths(s).map(Ladder).map_err(|e| e.to_string())
}

fn parse_schedule(s: &str) -> Result<Schedule, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "deltaoverlap",
    version,
    about = "Ground-state overlap of free and delta-perturbed Fermi gases",
    long_about = "Ground-state overlap |S_L^N|^2 of a free Fermi gas and one perturbed by a point \
                  (delta) interaction at the centre of a ball of radius L.\n\n\
                  Units are natural (hbar = 2m = 1): the one-body operator is -Laplacian, the Fermi \
                  energy E has wavenumber sqrt(E), and alpha is an inverse length entering the \
                  boundary condition -4*pi*alpha*f(0+) + f'(0+) = 0 of the s-wave channel.\n\n\
                  Set DELTAOVERLAP_THREADS to fix the number of worker threads."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the s-wave spectra of the free and perturbed operators.
    Spectrum(SpectrumArgs),
    /// Compute ln|S_L^N|^2 at one box size.
    Overlap(OverlapArgs),
    /// Follow ln|S_L^N|^2 along a ladder of box sizes and fit the decay exponent.
    Sweep(SweepArgs),
    /// Decompose ln|S_L^N|^2 into the stages of the asymptotic analysis.
    Appendix(AppendixArgs),
    /// Check the finite-dimensional rank-one identities on random matrices.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Output format; defaults to json for a .json path and csv otherwise.
    #[arg(long, value_enum)]
    #[serde(skip)]
    pub format: Option<Format>,
}

impl OutputArgs {
    fn resolved_format(&self) -> Format {
        self.format.unwrap_or_else(|| match self.out.as_deref().and_then(Path::extension) {
            Some(ext) if ext == "json" => Format::Json,
            _ => Format::Csv,
        })
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    /// Coupling alpha (inverse length); negative values are attractive and
    /// need 4*pi*|alpha|*L > 1.
    #[arg(long, allow_negative_numbers = true, value_parser = parse_finite)]
    pub alpha: f64,
    /// Box length L (radius of the ball).
    #[arg(long, value_parser = parse_positive)]
    pub length: f64,
    /// Number of levels n = 1..=modes of each operator.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub modes: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    /// Determinant of the N x N overlap matrix.
    Direct,
    /// Eigenvalue-only double product truncated at K levels.
    Product,
    /// Trace series over the occupied/unoccupied overlap block.
    Trace,
    /// All three.
    All,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Direct => vec![Method::Direct],
            MethodArg::Product => vec![Method::Product],
            MethodArg::Trace => vec![Method::TraceSeries],
            MethodArg::All => Method::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OverlapArgs {
    /// Coupling alpha (inverse length).
    #[arg(long, allow_negative_numbers = true, value_parser = parse_finite)]
    pub alpha: f64,
    /// Fermi energy E.
    #[arg(long, value_parser = parse_positive)]
    pub energy: f64,
    /// Box length L.
    #[arg(long, value_parser = parse_positive)]
    pub length: f64,
    /// Particle number N; defaults to floor(sqrt(E)*L/pi).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub particles: Option<u64>,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    pub method: MethodArg,
    /// Truncation multiplier: the product and trace routes use K = multiplier*N levels.
    #[arg(long, default_value_t = DEFAULT_TRUNCATION_MULTIPLIER as u64, value_parser = clap::value_parser!(u64).range(2..))]
    pub truncation: u64,
    /// Number of trace-series terms.
    #[arg(long, default_value_t = DEFAULT_SERIES_TERMS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    pub terms: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// Coupling alpha (inverse length).
    #[arg(long, allow_negative_numbers = true, value_parser = parse_finite)]
    pub alpha: f64,
    /// Fermi energy E.
    #[arg(long, value_parser = parse_positive)]
    pub energy: f64,
    /// Box lengths: start:stop:factor (geometric) or a comma-separated list.
    #[arg(long, value_parser = parse_ladder)]
    pub lengths: Ladder,
    /// Particle-number schedule: default (floor(sqrt(E)*L/pi)) or offset:<k>.
    #[arg(long, default_value = "default", value_parser = parse_schedule)]
    pub schedule: Schedule,
    #[arg(long, value_enum, default_value_t = MethodArg::Direct)]
    pub method: MethodArg,
    /// Truncation multiplier K/N; by default the product route picks K for a
    /// tail bound of 0.01 and the trace route uses K = 16N.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub truncation: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AppendixArgs {
    /// Coupling alpha (inverse length).
    #[arg(long, allow_negative_numbers = true, value_parser = parse_finite)]
    pub alpha: f64,
    /// Fermi energy E.
    #[arg(long, value_parser = parse_positive)]
    pub energy: f64,
    /// Box lengths: start:stop:factor (geometric) or a comma-separated list.
    #[arg(long, value_parser = parse_ladder)]
    pub lengths: Ladder,
    /// The k-sums of the linearised stages stop at multiplier*N.
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(2..))]
    pub truncation: u64,
    /// Relative tolerance of the 2D quadratures.
    #[arg(long, default_value_t = 1e-8, value_parser = parse_positive)]
    pub rel_tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    /// Number of seeds per dimension.
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    pub seeds: u64,
    /// First seed; seeds run consecutively from here.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = MIN_DIMENSION as u64)]
    pub min_dimension: u64,
    #[arg(long, default_value_t = 12)]
    pub max_dimension: u64,
    /// Report file (JSON); standard output when omitted.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn config_echo<T: Serialize>(subcommand: &str, args: &T) -> Value {
    let mut v = serde_json::to_value(args).unwrap_or(Value::Null);
    if let Value::Object(map) = &mut v {
        map.insert("subcommand".into(), Value::String(subcommand.into()));
    }
    v
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

fn finish(output: &OutputArgs, csv: impl FnOnce() -> Csv, json: impl FnOnce() -> Value) -> Result<(), CliError> {
    let text = match output.resolved_format() {
        Format::Csv => csv().render(),
        Format::Json => to_json_pretty(&json()),
    };
    emit_text(output.out.as_deref(), &text)
}

fn emit_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    write_output(path, text).map_err(|e| CliError {
        code: EXIT_FAILURE,
        message: match path {
            Some(p) => format!("cannot write {}: {e}", p.display()),
            None => format!("cannot write to standard output: {e}"),
        },
    })
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Spectrum(a) => run_spectrum(a),
        Command::Overlap(a) => run_overlap(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Appendix(a) => run_appendix(a),
        Command::Verify(a) => run_verify(a),
    }
}

#[derive(Serialize)]
struct SpectrumRow {
    n: usize,
    lambda_n: f64,
    mu_n: f64,
    theta_n: Option<f64>,
    residual: f64,
}

fn run_spectrum(a: &SpectrumArgs) -> Result<(), CliError> {
    let system = DeltaBox::new(a.alpha, a.length).map_err(|e| e.context("--alpha/--length"))?;
    let spectrum = ModeSpectrum::solve(&system, a.modes as usize)?;
    let rows: Vec<SpectrumRow> = (1..=spectrum.n_max())
        .map(|n| SpectrumRow {
            n,
            lambda_n: spectrum.lambda(n),
            mu_n: spectrum.mu(n),
            theta_n: spectrum.theta(n),
            residual: spectrum.residual(n),
        })
        .collect();
    finish(
        &a.output,
        || {
            let mut csv = Csv::new(&["n", "lambda_n", "mu_n", "theta_n", "residual"]);
            for r in &rows {
                csv.push(vec![
                    r.n.to_string(),
                    format_float(r.lambda_n),
                    format_float(r.mu_n),
                    format_optional(r.theta_n),
                    format_float(r.residual),
                ]);
            }
            csv
        },
        || {
            let report = json!({
                "bound_state_kappa": spectrum.bound_state().map(|b| b.kappa),
                "interlaced": spectrum.is_interlaced(),
            });
            document(config_echo("spectrum", a), to_value(&rows), report)
        },
    )
}

fn run_overlap(a: &OverlapArgs) -> Result<(), CliError> {
    let model = DeltaModel::new(a.alpha, a.length, a.energy)?;
    let n = match a.particles {
        Some(n) => n as usize,
        None => model
            .default_particles()
            .map_err(|e| e.context("no --particles given and the default schedule is empty"))?,
    };
    let k = a.truncation as usize * n;
    let results: Vec<OverlapResult> = a
        .method
        .methods()
        .into_iter()
        .map(|m| match m {
            Method::Direct => overlap_engine::overlap_direct(&model, n),
            Method::Product => overlap_engine::overlap_product(&model, n, k),
            Method::TraceSeries => overlap_engine::overlap_trace_series(&model, n, k, a.terms as usize),
        })
        .collect::<Result<_, _>>()?;
    finish(
        &a.output,
        || {
            let mut csv = Csv::new(&["method", "alpha", "energy", "L", "N", "K", "log_overlap_sq", "tail_bound"]);
            for r in &results {
                csv.push(vec![
                    r.method.to_string(),
                    format_float(r.model.alpha()),
                    format_float(r.model.energy()),
                    format_float(r.model.length()),
                    r.n.to_string(),
                    r.k.to_string(),
                    format_float(r.log_overlap_sq),
                    format_float(r.tail_bound),
                ]);
            }
            csv
        },
        || {
            let report = json!({
                "zeta": asymptotics::zeta(a.energy, a.alpha).ok(),
                "gamma": asymptotics::gamma(a.energy, a.alpha).ok(),
            });
            document(config_echo("overlap", a), to_value(&results), report)
        },
    )
}

fn single_method(arg: MethodArg, flag: &str) -> Result<Method, CliError> {
    match arg.methods().as_slice() {
        [m] => Ok(*m),
        _ => Err(CliError {
            code: EXIT_USAGE,
            message: format!("{flag} all is only available for the overlap subcommand"),
        }),
    }
}

fn run_sweep(a: &SweepArgs) -> Result<(), CliError> {
    let settings = SweepSettings {
        method: single_method(a.method, "--method")?,
        schedule: a.schedule,
        truncation_multiplier: a.truncation.map(|t| t as usize),
    };
    // validate every point before spending time on any of them
    for &l in &a.lengths.0 {
        DeltaModel::new(a.alpha, l, a.energy).map_err(|e| e.context(&format!("--lengths entry {l}")))?;
        a.schedule.particles(a.energy, l).map_err(|e| e.context(&format!("--lengths entry {l}")))?;
    }
    let records = sweep(a.energy, a.alpha, &a.lengths.0, &settings)?;
    let report = if records.len() >= 3 {
        Some(fit_exponent(&records, a.energy, a.alpha)?)
    } else {
        None
    };
    finish(
        &a.output,
        || {
            let mut csv = Csv::new(&["L", "N", "log_overlap_sq", "ratio", "local_slope"]);
            for r in &records {
                csv.push(vec![
                    format_float(r.length),
                    r.n.to_string(),
                    format_float(r.log_overlap_sq),
                    format_float(r.ratio),
                    format_optional(r.local_slope),
                ]);
            }
            if let Some(rep) = &report {
                csv.set_footer(to_json_compact(&to_value(rep)));
            }
            csv
        },
        || document(config_echo("sweep", a), to_value(&records), to_value(&report)),
    )
}

fn run_appendix(a: &AppendixArgs) -> Result<(), CliError> {
    for &l in &a.lengths.0 {
        DeltaModel::new(a.alpha, l, a.energy).map_err(|e| e.context(&format!("--lengths entry {l}")))?;
    }
    let settings = AppendixSettings {
        truncation_multiplier: a.truncation as usize,
        rel_tol: a.rel_tol,
    };
    let ladder = appendix_ladder(a.energy, a.alpha, &a.lengths.0, &settings)?;
    let slopes = if ladder.len() >= 2 { Some(stage_slopes(&ladder)?) } else { None };
    finish(
        &a.output,
        || {
            let mut csv = Csv::new(&[
                "L",
                "N",
                "K",
                "stage_exact",
                "stage_linearized",
                "stage_lambda",
                "stage_kernel",
                "stage_integral",
                "stage_final",
                "first_row",
                "bare_integral",
                "bare_integral_minus_log_L",
            ]);
            for d in &ladder {
                let mut row = vec![format_float(d.length), d.n.to_string(), d.k.to_string()];
                row.extend(d.stages().iter().map(|&s| format_float(s)));
                row.push(format_float(d.first_row));
                row.push(format_float(d.bare_integral));
                row.push(format_float(d.bare_integral_minus_log_length()));
                csv.push(row);
            }
            csv
        },
        || document(config_echo("appendix", a), to_value(&ladder), to_value(&slopes)),
    )
}

fn run_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let (lo, hi) = (a.min_dimension as usize, a.max_dimension as usize);
    if lo < MIN_DIMENSION || hi > MAX_DIMENSION || lo > hi {
        return Err(CliError {
            code: EXIT_USAGE,
            message: format!(
                "--min-dimension/--max-dimension must satisfy {MIN_DIMENSION} <= min <= max <= {MAX_DIMENSION}"
            ),
        });
    }
    let seeds: Vec<u64> = (0..a.seeds)
        .map(|i| a.seed.checked_add(i))
        .collect::<Option<_>>()
        .ok_or_else(|| CliError {
            code: EXIT_USAGE,
            message: "--seed + --seeds overflows a 64-bit seed".into(),
        })?;
    let checks = rank1_lab::verify_properties(lo..=hi, &seeds)?;
    let passed = checks.iter().all(|c| c.passed);
    let report = json!({
        "passed": passed,
        "dimensions": [lo, hi],
        "seeds": seeds,
    });
    let text = to_json_pretty(&document(config_echo("verify", a), to_value(&checks), report));
    emit_text(a.out.as_deref(), &text)?;
    if passed {
        Ok(())
    } else {
        let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError {
            code: EXIT_FAILURE,
            message: format!("verification failed: {}", failed.join(", ")),
        })
    }
}

/// Sizes the global thread pool from [`THREADS_ENV`] when it is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| CliError {
        code: EXIT_USAGE,
        message: format!("{THREADS_ENV} must be a positive integer, got '{value}'"),
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError {
            code: EXIT_FAILURE,
            message: format!("cannot configure thread pool: {e}"),
        })
}
