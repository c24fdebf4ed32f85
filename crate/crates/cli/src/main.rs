//! boxlab: reproducible experiments on no-signalling boxes from the command
//! line. Every command is deterministic given its flags and seed; floats are
//! serialized with 17 significant digits so identical invocations produce
//! byte-identical output.
//!
//! Exit codes: 0 success, 2 argument error, 3 numerical invariant failure.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use boxlab::boxes::{
    bell_bd, eval, mix, pr_box, uniform_box, BoxJson, CorrelationBox,
};
use boxlab::dilation::{dilate_generic, DilationJson, DilationResult};
use boxlab::lhv::{classical_max, DeterministicStrategy};
use boxlab::protocol::{reveal_protocol, AliceInput};
use boxlab::seesaw::{measurement_dilation, seesaw_optimize, OptResultJson};
use boxlab::tsirelson::{bound_report, BoundReport};
use boxlab::Error;

#[derive(Parser)]
#[command(name = "boxlab", version, about = "Simulation laboratory for no-signalling boxes, their unitary dilations, and Bell-type bounds")]
struct Cli {
    /// Write the payload to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BoxKind {
    Pr,
    Uniform,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a correlation box as JSON.
    #[command(name = "box")]
    BoxCmd {
        /// Outcome and setting dimension (>= 2).
        #[arg(long)]
        d: usize,
        /// Extremal family to start from.
        #[arg(long, value_enum)]
        kind: BoxKind,
        /// Mix with white noise at this visibility: v*box + (1-v)*uniform.
        #[arg(long)]
        v: Option<f64>,
    },
    /// Evaluate the bound chain for a noisy PR box at one or many visibilities.
    Bounds {
        #[arg(long)]
        d: usize,
        /// Single visibility in [0, 1].
        #[arg(long, conflicts_with = "sweep")]
        v: Option<f64>,
        /// Inclusive visibility grid start:end:steps (e.g. 0:1:101).
        #[arg(long, value_name = "START:END:STEPS")]
        sweep: Option<String>,
        /// Payload format; csv is only available for sweeps.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the coherent reveal protocol on a dilated box and report the
    /// transcript: P(z|x), channel capacity, and entanglement accounting.
    Protocol {
        #[arg(long)]
        d: usize,
        /// Visibility of the dilated noisy PR box.
        #[arg(long, default_value_t = 1.0, conflicts_with = "local")]
        v: f64,
        /// Use a measurement dilation of a see-saw strategy instead of the
        /// generic dilation (a genuinely local, product-form unitary).
        #[arg(long)]
        local: bool,
        /// Skip the coherent-copy steps at the ends of the chain.
        #[arg(long = "no-copy")]
        no_copy: bool,
        /// Seed for the search behind --local.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Also write the dilation (layout, matrix, roles, ancilla) here.
        #[arg(long = "emit-dilation", value_name = "PATH")]
        emit_dilation: Option<PathBuf>,
    },
    /// Exhaustive classical (deterministic-strategy) maximum of the functional.
    Lhv {
        #[arg(long)]
        d: usize,
    },
    /// Lower-bound the quantum value by alternating (see-saw) optimization.
    Seesaw {
        #[arg(long)]
        d: usize,
        /// Local Hilbert-space dimension per party (default: d).
        #[arg(long)]
        dim: Option<usize>,
        /// Independent seeded restarts (default: 20 for d=2, else 50).
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long = "max-iters", default_value_t = 2000)]
        max_iters: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

struct CliError {
    code: u8,
    message: String,
}

fn arg_error(message: impl Into<String>) -> CliError {
    CliError { code: 2, message: message.into() }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotNormalized { .. }
            | Error::NotUnitary { .. }
            | Error::NotHermitian { .. }
            | Error::NotPositive { .. }
            | Error::TraceNotOne { .. }
            | Error::NotOrthonormal { .. }
            | Error::InvalidProbability { .. }
            | Error::Numerical(_) => 3,
            _ => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError { code: 1, message: format!("i/o error: {e}") }
    }
}

/// 17 significant digits for every float, the fixed wire format.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError { code: 3, message: format!("serialization failed: {e}") })?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON output is UTF-8"))
}

fn emit(payload: &str, out: &Option<PathBuf>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, payload)?,
        None => io::stdout().write_all(payload.as_bytes())?,
    }
    Ok(())
}

fn require_d(d: usize) -> Result<(), CliError> {
    if d < 2 {
        return Err(arg_error(format!("--d must be at least 2, got {d}")));
    }
    Ok(())
}

fn require_visibility(v: f64) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&v) {
        return Err(arg_error(format!("visibility must lie in [0, 1], got {v}")));
    }
    Ok(())
}

fn noisy_pr(d: usize, v: f64) -> Result<CorrelationBox, CliError> {
    Ok(mix(&pr_box(d)?, &uniform_box(d)?, v)?)
}

fn parse_sweep(raw: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = raw.split(':').collect();
    if parts.len() != 3 {
        return Err(arg_error(format!("--sweep expects start:end:steps, got {raw:?}")));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| arg_error(format!("bad sweep start {:?}", parts[0])))?;
    let end: f64 = parts[1]
        .parse()
        .map_err(|_| arg_error(format!("bad sweep end {:?}", parts[1])))?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|_| arg_error(format!("bad sweep step count {:?}", parts[2])))?;
    require_visibility(start)?;
    require_visibility(end)?;
    if start > end {
        return Err(arg_error("sweep start must not exceed end"));
    }
    if steps < 2 {
        return Err(arg_error("sweep needs at least 2 steps"));
    }
    Ok((start, end, steps))
}

fn cmd_box(d: usize, kind: BoxKind, v: Option<f64>, out: &Option<PathBuf>) -> Result<(), CliError> {
    require_d(d)?;
    let base = match kind {
        BoxKind::Pr => pr_box(d)?,
        BoxKind::Uniform => uniform_box(d)?,
    };
    let b = match v {
        Some(v) => {
            require_visibility(v)?;
            mix(&base, &uniform_box(d)?, v)?
        }
        None => base,
    };
    let value = eval(&bell_bd(d)?, &b)?;
    emit(&to_json(&BoxJson::from(&b))?, out)?;
    eprintln!("B^{d} = {value:.6}");
    Ok(())
}

#[derive(Serialize)]
struct SweepPoint {
    v: f64,
    report: BoundReport,
}

fn cmd_bounds(
    d: usize,
    v: Option<f64>,
    sweep: Option<String>,
    format: Format,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    require_d(d)?;
    match (v, sweep) {
        (Some(v), None) => {
            if matches!(format, Format::Csv) {
                return Err(arg_error("--format csv requires --sweep"));
            }
            require_visibility(v)?;
            let report = bound_report(&noisy_pr(d, v)?)?;
            eprintln!(
                "c1 = {:.6} vs sqrt({d}) = {:.6}; violated = {}",
                report.c1_lhs, report.c1_rhs, report.violates_c1
            );
            emit(&to_json(&report)?, out)
        }
        (None, Some(raw)) => {
            let (start, end, steps) = parse_sweep(&raw)?;
            let mut points = Vec::with_capacity(steps);
            for i in 0..steps {
                let frac = i as f64 / (steps - 1) as f64;
                let v = start + frac * (end - start);
                points.push(SweepPoint { v, report: bound_report(&noisy_pr(d, v)?)? });
            }
            let payload = match format {
                Format::Json => to_json(&points)?,
                Format::Csv => {
                    let mut csv = String::from("v,bell_value,c1_lhs,violated\n");
                    for p in &points {
                        csv.push_str(&format!(
                            "{},{},{},{}\n",
                            fmt_f64(p.v),
                            fmt_f64(p.report.bell_value),
                            fmt_f64(p.report.c1_lhs),
                            p.report.violates_c1
                        ));
                    }
                    csv
                }
            };
            eprintln!("{steps} visibilities from {start} to {end}");
            emit(&payload, out)
        }
        (None, None) => Err(arg_error("bounds needs either --v or --sweep")),
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    }
}

fn cmd_protocol(
    d: usize,
    v: f64,
    local: bool,
    no_copy: bool,
    seed: u64,
    emit_dilation: Option<PathBuf>,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    require_d(d)?;
    require_visibility(v)?;
    let dr: DilationResult = if local {
        // small fixed search; plenty for a demonstration strategy
        let opt = seesaw_optimize(&bell_bd(d)?, d, d, 4, 500, seed)?;
        measurement_dilation(&opt.strategy)?
    } else {
        dilate_generic(&noisy_pr(d, v)?)?
    };
    if let Some(path) = &emit_dilation {
        std::fs::write(path, to_json(&DilationJson::from(&dr))?)?;
    }
    let transcript = reveal_protocol(&dr, AliceInput::Superposed, !no_copy)?;
    eprintln!(
        "capacity = {:.6} bits; entanglement {:.6} -> {:.6} ebits",
        transcript.capacity_bits,
        transcript.entanglement_before_ebits,
        transcript.entanglement_after_ebits
    );
    emit(&to_json(&transcript)?, out)
}

#[derive(Serialize)]
struct LhvJson<'a> {
    d: usize,
    value: f64,
    strategies_checked: u64,
    witness: &'a DeterministicStrategy,
}

fn cmd_lhv(d: usize, out: &Option<PathBuf>) -> Result<(), CliError> {
    require_d(d)?;
    let result = classical_max(&bell_bd(d)?)?;
    eprintln!("LHV max = {:.6} over {} strategies", result.value, result.strategies_checked);
    emit(
        &to_json(&LhvJson {
            d,
            value: result.value,
            strategies_checked: result.strategies_checked,
            witness: &result.witness,
        })?,
        out,
    )
}

fn cmd_seesaw(
    d: usize,
    dim: Option<usize>,
    restarts: Option<usize>,
    max_iters: usize,
    seed: u64,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    require_d(d)?;
    let dim = dim.unwrap_or(d);
    let restarts = restarts.unwrap_or(if d == 2 { 20 } else { 50 });
    if dim < 2 {
        return Err(arg_error(format!("--dim must be at least 2, got {dim}")));
    }
    if restarts == 0 || max_iters == 0 {
        return Err(arg_error("--restarts and --max-iters must be positive"));
    }
    let result = seesaw_optimize(&bell_bd(d)?, d, dim, restarts, max_iters, seed)?;
    eprintln!(
        "best B^{d} = {:.9} (converged = {}, iterations = {})",
        result.best_value, result.converged, result.iterations
    );
    emit(&to_json(&OptResultJson::from(&result))?, out)
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(raw) = std::env::var("BOXLAB_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .map_err(|_| arg_error(format!("BOXLAB_THREADS must be a nonnegative integer, got {raw:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError { code: 3, message: format!("thread pool setup failed: {e}") })?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::BoxCmd { d, kind, v } => cmd_box(d, kind, v, &cli.out),
        Command::Bounds { d, v, sweep, format } => cmd_bounds(d, v, sweep, format, &cli.out),
        Command::Protocol { d, v, local, no_copy, seed, emit_dilation } => {
            cmd_protocol(d, v, local, no_copy, seed, emit_dilation, &cli.out)
        }
        Command::Lhv { d } => cmd_lhv(d, &cli.out),
        Command::Seesaw { d, dim, restarts, max_iters, seed } => {
            cmd_seesaw(d, dim, restarts, max_iters, seed, &cli.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads().and_then(|()| run(cli)) {
        eprintln!("error: {}", e.message);
        return ExitCode::from(e.code);
    }
    ExitCode::SUCCESS
}
