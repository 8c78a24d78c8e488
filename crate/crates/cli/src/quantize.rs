use std::io::Write;
use std::path::PathBuf;

use adaptivfloat::analyzer::rms_error;
use adaptivfloat::baseline::PositParams;
use adaptivfloat::io::write_container;
use adaptivfloat::{quantize_with, Codebook, FormatKind, QuantParams};
use clap::Args;

use crate::args::{file_stem, load_manifest, ExecArgs, FormatArgs};
use crate::{usage, CliResult};

#[derive(Args, Debug)]
pub struct QuantizeArgs {
    /// Tensor manifest (JSON).
    pub manifest: PathBuf,
    #[command(flatten)]
    pub format: FormatArgs,
    /// Output directory for the `.aqf` containers.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub exec: ExecArgs,
}

pub fn run(a: &QuantizeArgs, out: &mut impl Write) -> CliResult {
    let spec = a.format.spec()?;
    let manifest = load_manifest(&a.manifest)?;
    std::fs::create_dir_all(&a.out).map_err(|e| adaptivfloat::Error::Io {
        path: a.out.clone(),
        source: e,
    })?;
    writeln!(out, "tensor\tformat\tn\te\tbias_or_scale\trms\tfile")?;
    for entry in &manifest.tensors {
        let t = manifest.read(entry)?;
        let q = quantize_with(&t, spec, a.exec.execution()).map_err(|e| e.in_layer(t.name()))?;
        let rms = rms_error(&t, &q)?;
        let path = a.out.join(format!("{}.aqf", file_stem(t.name())));
        write_container(&path, &q)?;
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{rms:e}\t{}",
            t.name(),
            spec.kind,
            spec.n,
            spec.e,
            q.params().bias_or_scale(),
            path.display()
        )?;
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct CodebookArgs {
    #[command(flatten)]
    pub format: FormatArgs,
    /// Exponent bias (AdaptivFloat) or shared exponent (bfp).
    #[arg(long, allow_hyphen_values = true)]
    pub bias: Option<i32>,
    /// Step size for uniform.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Print `code,value` CSV instead of aligned text.
    #[arg(long)]
    pub csv: bool,
}

pub fn codebook(a: &CodebookArgs, out: &mut impl Write) -> CliResult {
    let spec = a.format.spec()?;
    let param = match spec.kind {
        FormatKind::Uniform => {
            if a.bias.is_some() {
                return Err(usage("uniform takes --scale, not --bias"));
            }
            a.scale.unwrap_or(1.0)
        }
        FormatKind::AdaptivFloat | FormatKind::BlockFloat => {
            if a.scale.is_some() {
                return Err(usage(format!("{} takes --bias, not --scale", spec.kind)));
            }
            f64::from(a.bias.unwrap_or(0))
        }
        FormatKind::IeeeLikeFloat | FormatKind::Posit => {
            if a.bias.is_some() || a.scale.is_some() {
                return Err(usage(format!("{} has no bias or scale parameter", spec.kind)));
            }
            0.0
        }
    };
    let params = QuantParams::from_spec(spec, param).map_err(|e| usage(e.to_string()))?;
    let cb = Codebook::enumerate(&params)?;
    if a.csv {
        writeln!(out, "code,value")?;
    }
    // one line per distinct value, listing every code that decodes to it
    let entries = cb.entries();
    let mut i = 0;
    while i < entries.len() {
        let value = entries[i].value;
        let mut codes = Vec::new();
        while i < entries.len() && entries[i].value == value {
            codes.push(entries[i].code.to_bit_string());
            i += 1;
        }
        if a.csv {
            writeln!(out, "{},{value}", codes.join(" "))?;
        } else {
            writeln!(out, "{:>14}  {}", value, codes.join(" "))?;
        }
    }
    if spec.kind == FormatKind::Posit {
        let nar = PositParams::new(spec.n, spec.e)?.nar();
        let bits = format!("{:0width$b}", nar, width = spec.n as usize);
        if a.csv {
            writeln!(out, "{bits},NaR")?;
        } else {
            writeln!(out, "{:>14}  {bits}", "NaR")?;
        }
    }
    Ok(())
}
