use std::io::Write;
use std::path::PathBuf;

use adaptivfloat::analyzer::synth::{generate_suite, Suite, SuiteConfig, DEFAULT_SEED};
use adaptivfloat::analyzer::{
    calibrate_activation_bias, exponent_search_with, layer_sweep_streaming, summarize, FormatChoice, LayerStats,
    SweepSummaryRow,
};
use adaptivfloat::io::{read_sweep_csv, write_atomic, write_atomic_with, write_summary_json, write_sweep_json, Role};
use adaptivfloat::{Error, TensorF32};
use clap::{Args, ValueEnum};

use crate::args::{load_manifest, parse_choice, parse_kind, tensors_with_role, ExecArgs};
use crate::{usage, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Narrow,
    Laplacian,
    Mixture,
    All,
}

/// Expands `all` and drops repeats, keeping first-seen order.
pub fn unique_suites(args: &[SuiteArg]) -> Vec<Suite> {
    let mut out: Vec<Suite> = Vec::new();
    for s in args.iter().flat_map(|a| a.suites()) {
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

impl SuiteArg {
    fn suites(self) -> Vec<Suite> {
        match self {
            SuiteArg::Narrow => vec![Suite::Narrow],
            SuiteArg::Laplacian => vec![Suite::Laplacian],
            SuiteArg::Mixture => vec![Suite::Mixture],
            SuiteArg::All => Suite::ALL.to_vec(),
        }
    }
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Tensor manifest; every tensor is treated as one layer.
    #[arg(required_unless_present = "suite", conflicts_with = "suite")]
    pub manifest: Option<PathBuf>,
    /// Sweep built-in synthetic suites instead of a manifest.
    #[arg(long, value_enum)]
    pub suite: Vec<SuiteArg>,
    /// Seed for the synthetic suites.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Formats as `kind` or `kind:e`.
    #[arg(long, value_delimiter = ',', value_parser = parse_choice,
          default_value = "adaptivfloat,float,bfp,uniform,posit")]
    pub formats: Vec<FormatChoice>,
    /// Word widths.
    #[arg(long, value_delimiter = ',', default_value = "4,6,8",
          value_parser = clap::value_parser!(u8).range(2..=16))]
    pub bits: Vec<u8>,
    /// Per-layer rows as CSV, written while the sweep runs.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Per-layer rows as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Quartile summary as JSON.
    #[arg(long)]
    pub summary_json: Option<PathBuf>,
    #[command(flatten)]
    pub exec: ExecArgs,
}

fn sweep_into(
    a: &AnalyzeArgs,
    layers: &mut dyn Iterator<Item = adaptivfloat::Result<TensorF32>>,
    csv: Option<&mut dyn Write>,
) -> adaptivfloat::Result<Vec<LayerStats>> {
    let mut rows = Vec::new();
    let mut writer = csv.map(adaptivfloat::io::SweepCsvWriter::new).transpose()?;
    layer_sweep_streaming(layers, &a.formats, &a.bits, a.exec.execution(), |r| {
        if let Some(w) = writer.as_mut() {
            w.write(r)?;
        }
        rows.push(r.clone());
        Ok(())
    })?;
    if let Some(w) = writer {
        w.finish()?;
    }
    Ok(rows)
}

pub fn run(a: &AnalyzeArgs, out: &mut impl Write) -> CliResult {
    for choice in &a.formats {
        for &n in &a.bits {
            choice.spec(n).map_err(|e| usage(e.to_string()))?;
        }
    }
    let manifest = a.manifest.as_deref().map(load_manifest).transpose()?;
    let mut layers: Box<dyn Iterator<Item = adaptivfloat::Result<TensorF32>>> = match &manifest {
        Some(m) => Box::new(m.iter_tensors()),
        None => {
            let cfg = SuiteConfig {
                seed: a.seed,
                ..SuiteConfig::default()
            };
            let suites = unique_suites(&a.suite);
            Box::new(suites.into_iter().flat_map(move |s| generate_suite(s, &cfg)).map(Ok))
        }
    };
    let rows = match &a.csv {
        Some(path) => {
            let mut rows = Vec::new();
            write_atomic_with(path, |w| {
                rows = sweep_into(a, &mut layers, Some(w))?;
                Ok(())
            })?;
            rows
        }
        None => sweep_into(a, &mut layers, None)?,
    };
    if let Some(path) = &a.json {
        write_atomic_with(path, |w| write_sweep_json(w, &rows))?;
    }
    let summary = summarize(&rows);
    if let Some(path) = &a.summary_json {
        write_atomic_with(path, |w| write_summary_json(w, &summary))?;
    }
    print_summary(out, &summary)
}

fn print_summary(out: &mut impl Write, summary: &[SweepSummaryRow]) -> CliResult {
    writeln!(out, "format\tn\te\tlayers\tmin\tq1\tmedian\tq3\tmax\tmean")?;
    for s in summary {
        let d = &s.distribution;
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}\t{:e}",
            s.format, s.n, s.e, s.layers, d.min, d.q1, d.median, d.q3, d.max, d.mean
        )?;
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Sweep CSV written by `analyze --csv`.
    pub csv: PathBuf,
    /// Also write the summary as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

pub fn report(a: &ReportArgs, out: &mut impl Write) -> CliResult {
    let file = std::fs::File::open(&a.csv).map_err(|e| Error::Io {
        path: a.csv.clone(),
        source: e,
    })?;
    let rows = read_sweep_csv(std::io::BufReader::new(file)).map_err(|e| e.in_layer(&a.csv.display().to_string()))?;
    let summary = summarize(&rows);
    if let Some(path) = &a.json {
        write_atomic_with(path, |w| write_summary_json(w, &summary))?;
    }
    print_summary(out, &summary)
}

#[derive(Args, Debug)]
pub struct CalibrateArgs {
    /// Manifest; tensors with role `activation` are calibrated, and their
    /// leading axis indexes the batches.
    pub manifest: PathBuf,
    /// AdaptivFloat exponent width the bias is derived for.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=8))]
    pub exp_bits: u8,
    /// Use only the first K batches of each tensor.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub calib_batches: Option<u64>,
    /// Write the records as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn split_batches(t: &TensorF32, limit: Option<usize>) -> adaptivfloat::Result<Vec<TensorF32>> {
    let (count, per) = match t.shape() {
        [] => (1, 1),
        [b, rest @ ..] => (*b, rest.iter().product::<usize>()),
    };
    let take = limit.map_or(count, |k| k.min(count));
    (0..take)
        .map(|i| TensorF32::vector(t.name(), t.data()[i * per..(i + 1) * per].to_vec()))
        .collect()
}

pub fn calibrate(a: &CalibrateArgs, out: &mut impl Write) -> CliResult {
    let m = load_manifest(&a.manifest)?;
    let limit = a.calib_batches.map(|k| k as usize);
    let mut records = Vec::new();
    for t in tensors_with_role(&m, Role::Activation)? {
        let batches = split_batches(&t, limit)?;
        records.push(calibrate_activation_bias(t.name(), &batches, a.exp_bits).map_err(|e| e.in_layer(t.name()))?);
    }
    writeln!(out, "tensor\tbatches\tobserved_max\texp_bias\tdegenerate")?;
    for (r, t) in records
        .iter()
        .zip(m.tensors.iter().filter(|e| e.role == Role::Activation))
    {
        let batches = t.shape.first().copied().unwrap_or(1);
        let used = limit.map_or(batches, |k| k.min(batches));
        writeln!(
            out,
            "{}\t{used}\t{}\t{}\t{}",
            r.name, r.observed_max, r.exp_bias, r.degenerate
        )?;
    }
    if let Some(path) = &a.out {
        write_atomic(path, &serde_json::to_vec_pretty(&records).map_err(Error::from)?)?;
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct ExpSearchArgs {
    /// Manifest; the weight tensors are searched over.
    pub manifest: PathBuf,
    #[arg(long, value_parser = parse_kind)]
    pub format: adaptivfloat::FormatKind,
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=16))]
    pub bits: u8,
    #[command(flatten)]
    pub exec: ExecArgs,
}

pub fn exp_search(a: &ExpSearchArgs, out: &mut impl Write) -> CliResult {
    let m = load_manifest(&a.manifest)?;
    let layers = tensors_with_role(&m, Role::Weight)?;
    if layers.is_empty() {
        return Err(CliError::from(Error::Config("manifest has no weight tensors".into())));
    }
    if a.format.exponent_range(a.bits).next().is_none() {
        return Err(usage(format!("{} has no exponent width at n = {}", a.format, a.bits)));
    }
    let (best, table) = exponent_search_with(&layers, a.bits, a.format, a.exec.execution())?;
    writeln!(out, "e\tmean_rms")?;
    for (e, mean) in table {
        writeln!(out, "{e}\t{mean:e}")?;
    }
    writeln!(out, "best\t{best}")?;
    Ok(())
}
