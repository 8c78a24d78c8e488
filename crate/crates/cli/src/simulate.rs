use std::io::Write;
use std::path::{Path, PathBuf};

use adaptivfloat::io::{write_atomic, write_atomic_with, WorkloadDescriptor};
use adaptivfloat::pe::workload::{run_workload, PeSettings, WorkloadReport};
use adaptivfloat::pe::{probe_hfint, probe_int, AccWidthMode, HfintPeConfig, IntPeConfig, PeKind, WidthProbe};
use adaptivfloat::Error;
use clap::{Args, ValueEnum};

use crate::{usage, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PeArg {
    Int,
    Hfint,
    /// Run both on the same workload and compare per-step MSE.
    Both,
}

impl PeArg {
    fn kinds(self) -> Vec<PeKind> {
        match self {
            PeArg::Int => vec![PeKind::Int],
            PeArg::Hfint => vec![PeKind::Hfint],
            PeArg::Both => vec![PeKind::Int, PeKind::Hfint],
        }
    }
}

fn parse_mode(s: &str) -> Result<AccWidthMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Workload descriptor (JSON).
    #[arg(required_unless_present = "probe")]
    pub descriptor: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub pe: PeArg,
    /// HFINT accumulator sizing: `paper` or `checked`.
    #[arg(long, value_parser = parse_mode)]
    pub acc_width_mode: Option<AccWidthMode>,
    /// Explicit accumulator width, overriding the mode.
    #[arg(long)]
    pub acc_width: Option<u32>,
    /// Word width n.
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=16))]
    pub bits: Option<u8>,
    /// HFINT exponent width.
    #[arg(long)]
    pub exp_bits: Option<u8>,
    #[arg(long)]
    pub lanes: Option<u32>,
    /// Longest accumulation H.
    #[arg(long)]
    pub max_acc: Option<u32>,
    /// Calibrate on the first K time steps only.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub calib_batches: Option<u64>,
    /// Per-step trace CSV; with `--pe both` the PE name is added before
    /// the extension.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// MSE report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Report accumulator widths measured on adversarial operands instead
    /// of running a workload.
    #[arg(long, conflicts_with_all = ["descriptor", "trace", "report", "calib_batches"])]
    pub probe: bool,
}

impl SimulateArgs {
    fn settings(&self, base: PeSettings) -> PeSettings {
        PeSettings {
            n: self.bits.unwrap_or(base.n),
            e: self.exp_bits.unwrap_or(base.e),
            lanes: self.lanes.unwrap_or(base.lanes),
            max_acc: self.max_acc.unwrap_or(base.max_acc),
            acc_width_mode: self.acc_width_mode.unwrap_or(base.acc_width_mode),
            acc_width: self.acc_width.or(base.acc_width),
            ..base
        }
    }
}

fn trace_path(base: &Path, pe: PeKind, both: bool) -> PathBuf {
    if !both {
        return base.to_path_buf();
    }
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}.{pe}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{pe}"),
    };
    base.with_file_name(name)
}

pub fn run(a: &SimulateArgs, out: &mut impl Write) -> CliResult {
    if a.probe {
        return probe(a, out);
    }
    let path = a.descriptor.as_ref().expect("clap enforces the descriptor");
    let d = WorkloadDescriptor::load(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let wl = d.to_workload(dir)?;
    let settings = a.settings(d.pe);
    let calib_batches = a.calib_batches.map(|k| k as usize).or(d.calib_batches);
    let both = a.pe == PeArg::Both;
    let mut reports: Vec<WorkloadReport> = Vec::new();
    for pe in a.pe.kinds() {
        let result = run_workload(&wl, pe, &settings, d.calibration.as_ref(), calib_batches);
        let report = match result {
            Ok(r) => r,
            Err(Error::Overflow(o)) => {
                if let Some(t) = &a.trace {
                    let p = trace_path(t, pe, both);
                    write_atomic_with(&p, |w| o.trace.write_csv(w))?;
                }
                return Err(CliError::Lib(Error::Overflow(o)));
            }
            Err(Error::Config(msg)) => return Err(usage(msg)),
            Err(e) => return Err(e.into()),
        };
        if let Some(t) = &a.trace {
            write_atomic_with(&trace_path(t, pe, both), |w| report.trace.write_csv(w))?;
        }
        reports.push(report);
    }
    writeln!(out, "pe\tworkload\tsteps\tacc_width\tmax_acc_bits\tmean_mse")?;
    for r in &reports {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{:e}",
            r.pe, r.kind, r.timesteps, r.acc_width, r.max_acc_bits, r.mean_mse
        )?;
    }
    if let [int, hf] = &reports[..] {
        let wins = hf
            .per_step_mse
            .iter()
            .zip(&int.per_step_mse)
            .filter(|(h, i)| h <= i)
            .count();
        writeln!(out, "hfint <= int on {wins}/{} steps", hf.per_step_mse.len())?;
    }
    if let Some(p) = &a.report {
        let json = if both {
            serde_json::to_vec_pretty(&reports)
        } else {
            serde_json::to_vec_pretty(&reports[0])
        };
        write_atomic(p, &json.map_err(Error::from)?)?;
    }
    Ok(())
}

fn probe(a: &SimulateArgs, out: &mut impl Write) -> CliResult {
    let s = a.settings(PeSettings::default());
    let mut probes: Vec<WidthProbe> = Vec::new();
    for pe in a.pe.kinds() {
        let p = match pe {
            PeKind::Int => {
                let mut cfg = IntPeConfig::new(s.n, s.lanes, s.max_acc, s.scale_bits, s.frac_bits)
                    .map_err(|e| usage(e.to_string()))?;
                if let Some(w) = s.acc_width {
                    cfg = cfg.with_acc_width(w).map_err(|e| usage(e.to_string()))?;
                }
                probe_int(&cfg)?
            }
            PeKind::Hfint => {
                let mut cfg = HfintPeConfig::new(s.n, s.e, s.lanes, s.max_acc, s.acc_width_mode)
                    .map_err(|e| usage(e.to_string()))?;
                if let Some(w) = s.acc_width {
                    cfg = cfg.with_acc_width(w).map_err(|e| usage(e.to_string()))?;
                }
                probe_hfint(&cfg)?
            }
        };
        probes.push(p);
    }
    writeln!(out, "pe\tdeclared\tpaper\tchecked\tminimal\tsufficient")?;
    let opt = |v: Option<u32>| v.map_or("-".to_string(), |v| v.to_string());
    for p in probes {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            p.pe,
            p.declared,
            opt(p.paper),
            opt(p.checked),
            p.minimal,
            if p.declared_suffices() { "yes" } else { "no" }
        )?;
    }
    Ok(())
}
