use std::io::Write;
use std::path::PathBuf;

use adaptivfloat::analyzer::synth::{generate_suite, SuiteConfig, DEFAULT_SEED};
use adaptivfloat::io::{write_tensor_set, Role, WorkloadDescriptor};
use adaptivfloat::pe::workload::{identity_gemv, synthetic_lstm, LstmSynthConfig, PeSettings, Workload};
use adaptivfloat::Error;
use clap::{Args, Subcommand};

use crate::analyze::{unique_suites, SuiteArg};
use crate::CliResult;

#[derive(Subcommand, Debug)]
pub enum SynthCommand {
    /// Synthetic weight suites as a tensor manifest.
    Suites(SuitesArgs),
    /// Wide-weight LSTM: tensors plus a workload descriptor.
    Lstm(LstmArgs),
    /// Identity-weight GEMV: tensors plus a workload descriptor.
    GemvIdentity(GemvArgs),
}

#[derive(Args, Debug)]
pub struct SuitesArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Vec<SuiteArg>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 6)]
    pub layers: usize,
    #[arg(long, default_value_t = 64)]
    pub rows: usize,
    #[arg(long, default_value_t = 64)]
    pub cols: usize,
}

#[derive(Args, Debug)]
pub struct LstmArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub timesteps: usize,
    #[arg(long, default_value_t = 32)]
    pub hidden: usize,
    #[arg(long, default_value_t = 16)]
    pub input_dim: usize,
}

#[derive(Args, Debug)]
pub struct GemvArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    #[arg(long, default_value_t = 20)]
    pub timesteps: usize,
}

fn create(dir: &PathBuf) -> CliResult {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    Ok(())
}

/// Writes `tensors.json` plus `workload.json` next to it.
fn write_workload(dir: &PathBuf, wl: &Workload) -> CliResult<PathBuf> {
    create(dir)?;
    let mut tensors = vec![(wl.weight().clone(), Role::Weight)];
    if let Some(b) = wl.bias() {
        tensors.push((b.clone(), Role::Weight));
    }
    tensors.push((wl.inputs().clone(), Role::Activation));
    write_tensor_set(&dir.join("tensors.json"), &tensors)?;
    let d = WorkloadDescriptor {
        kind: wl.kind(),
        timesteps: wl.timesteps(),
        input_dim: wl.input_dim(),
        hidden: wl.hidden(),
        manifest: "tensors.json".into(),
        weight: wl.weight().name().into(),
        bias: wl.bias().map(|b| b.name().into()),
        inputs: wl.inputs().name().into(),
        activation: wl.activation(),
        pe: PeSettings::default(),
        calibration: None,
        calib_batches: None,
    };
    let path = dir.join("workload.json");
    d.save(&path)?;
    Ok(path)
}

pub fn run(c: &SynthCommand, out: &mut impl Write) -> CliResult {
    match c {
        SynthCommand::Suites(a) => {
            create(&a.out)?;
            let cfg = SuiteConfig {
                layers: a.layers,
                rows: a.rows,
                cols: a.cols,
                seed: a.seed,
                decay_permille: None,
            };
            let tensors: Vec<_> = unique_suites(&a.suite)
                .into_iter()
                .flat_map(|s| generate_suite(s, &cfg))
                .map(|t| (t, Role::Weight))
                .collect();
            let path = a.out.join("manifest.json");
            write_tensor_set(&path, &tensors)?;
            writeln!(out, "{}\t{} tensors", path.display(), tensors.len())?;
        }
        SynthCommand::Lstm(a) => {
            let wl = synthetic_lstm(&LstmSynthConfig {
                hidden: a.hidden,
                input_dim: a.input_dim,
                timesteps: a.timesteps,
                seed: a.seed,
                ..LstmSynthConfig::default()
            })
            .map_err(|e| crate::usage(e.to_string()))?;
            writeln!(out, "{}", write_workload(&a.out, &wl)?.display())?;
        }
        SynthCommand::GemvIdentity(a) => {
            let wl = identity_gemv(a.dim, a.timesteps, a.seed).map_err(|e| crate::usage(e.to_string()))?;
            writeln!(out, "{}", write_workload(&a.out, &wl)?.display())?;
        }
    }
    Ok(())
}
