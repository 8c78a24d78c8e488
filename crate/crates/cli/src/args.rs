use std::path::Path;

use adaptivfloat::analyzer::FormatChoice;
use adaptivfloat::io::{Manifest, Role};
use adaptivfloat::{Execution, FormatKind, FormatSpec, TensorF32};
use clap::Args;

use crate::{usage, CliResult};

pub fn parse_kind(s: &str) -> Result<FormatKind, String> {
    s.parse().map_err(|e: adaptivfloat::Error| e.to_string())
}

/// `kind` or `kind:e`.
pub fn parse_choice(s: &str) -> Result<FormatChoice, String> {
    match s.split_once(':') {
        Some((k, e)) => {
            let e = e.parse::<u8>().map_err(|_| format!("bad exponent width in `{s}`"))?;
            Ok(FormatChoice::with_exp_bits(parse_kind(k)?, e))
        }
        None => Ok(FormatChoice::new(parse_kind(s)?)),
    }
}

/// `--format`, `--bits` and an optional `--exp-bits`.
#[derive(Args, Debug, Clone)]
pub struct FormatArgs {
    /// adaptivfloat, float, bfp, uniform or posit.
    #[arg(long, value_parser = parse_kind)]
    pub format: FormatKind,
    /// Total word width n.
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=16))]
    pub bits: u8,
    /// Exponent width (es for posits); defaults to the format's usual choice.
    #[arg(long)]
    pub exp_bits: Option<u8>,
}

impl FormatArgs {
    pub fn spec(&self) -> CliResult<FormatSpec> {
        let e = self.exp_bits.unwrap_or_else(|| self.format.default_exp_bits(self.bits));
        FormatSpec::new(self.format, self.bits, e).map_err(|e| usage(e.to_string()))
    }
}

#[derive(Args, Debug, Clone, Copy)]
pub struct ExecArgs {
    /// Run on one thread.
    #[arg(long)]
    pub sequential: bool,
}

impl ExecArgs {
    pub fn execution(self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

pub fn load_manifest(path: &Path) -> CliResult<Manifest> {
    Ok(Manifest::load(path)?)
}

pub fn tensors_with_role(m: &Manifest, role: Role) -> CliResult<Vec<TensorF32>> {
    let mut out = Vec::new();
    for entry in m.tensors.iter().filter(|e| e.role == role) {
        out.push(m.read(entry)?);
    }
    Ok(out)
}

/// Keeps alphanumerics, `.`, `-` and `_`.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect()
}
