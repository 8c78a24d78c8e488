//! `afq`: quantize tensor files, dump codebooks, run error sweeps and
//! simulate the INT / HFINT processing elements.
//!
//! Exit status: 0 success, 2 usage error, 3 data or format error,
//! 4 accumulator overflow during simulation.

mod analyze;
mod args;
mod quantize;
mod simulate;
mod synth;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "afq",
    version,
    about = "Bit-exact number-format lab: AdaptivFloat and friends"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantize every tensor of a manifest into AQF1 containers.
    Quantize(quantize::QuantizeArgs),
    /// List every representable value of a format.
    Codebook(quantize::CodebookArgs),
    /// Per-layer RMS error sweep over formats and widths.
    Analyze(analyze::AnalyzeArgs),
    /// Quartile summary of a sweep CSV written by `analyze`.
    Report(analyze::ReportArgs),
    /// Derive activation exponent biases from calibration batches.
    Calibrate(analyze::CalibrateArgs),
    /// Pick the exponent width with the lowest mean RMS error.
    ExpSearch(analyze::ExpSearchArgs),
    /// Run a workload through a PE model, or probe accumulator widths.
    Simulate(simulate::SimulateArgs),
    /// Write synthetic weight suites and workloads.
    #[command(subcommand)]
    Synth(synth::SynthCommand),
}

pub enum CliError {
    Usage(String),
    Lib(adaptivfloat::Error),
}

impl From<adaptivfloat::Error> for CliError {
    fn from(e: adaptivfloat::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    let result = match cli.command {
        Command::Quantize(a) => quantize::run(&a, &mut out),
        Command::Codebook(a) => quantize::codebook(&a, &mut out),
        Command::Analyze(a) => analyze::run(&a, &mut out),
        Command::Report(a) => analyze::report(&a, &mut out),
        Command::Calibrate(a) => analyze::calibrate(&a, &mut out),
        Command::ExpSearch(a) => analyze::exp_search(&a, &mut out),
        Command::Simulate(a) => simulate::run(&a, &mut out),
        Command::Synth(c) => synth::run(&c, &mut out),
    };
    let flushed = out.flush();
    match result.and(flushed.map_err(CliError::from)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("afq: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Lib(e)) => {
            eprintln!("afq: {e}");
            ExitCode::from(if e.is_overflow() { 4 } else { 3 })
        }
    }
}
