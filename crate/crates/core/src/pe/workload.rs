//! Weight-stationary GEMV and LSTM workloads run through either PE and
//! compared step by step against an `f64` reference.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{
    hfint_pe_run, int_pe_run, AccWidthMode, Activation, HfintPeConfig, HfintPostStage, IntPeConfig, IntPostScale,
    Matrix, PeKind, PeTrace,
};
use crate::adaptivfloat::derive_exp_bias;
use crate::analyzer::{calibrate_activation_bias, CalibrationRecord};
use crate::baseline::UniformParams;
use crate::error::{Error, Result};
use crate::tensor::TensorF32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkloadKind {
    Gemv,
    Lstm,
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WorkloadKind::Gemv => "gemv",
            WorkloadKind::Lstm => "lstm",
        })
    }
}

impl FromStr for WorkloadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gemv" => Ok(WorkloadKind::Gemv),
            "lstm" => Ok(WorkloadKind::Lstm),
            other => Err(Error::config(format!("unknown workload kind `{other}`"))),
        }
    }
}

/// GEMV: `y_t = act(W x_t + b)` with `W` of shape `[hidden, input_dim]`.
/// LSTM: gates `W [x_t; h_{t-1}] + b` in `i, f, g, o` row order, `W` of shape
/// `[4 hidden, input_dim + hidden]`. Inputs are `[timesteps, input_dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    kind: WorkloadKind,
    timesteps: usize,
    input_dim: usize,
    hidden: usize,
    weight: TensorF32,
    bias: Option<TensorF32>,
    inputs: TensorF32,
    activation: Activation,
}

fn dims2(t: &TensorF32) -> Result<(usize, usize)> {
    match *t.shape() {
        [r, c] => Ok((r, c)),
        _ => Err(Error::InvalidTensor {
            name: t.name().to_string(),
            reason: format!("expected a 2-D tensor, got shape {:?}", t.shape()),
        }),
    }
}

impl Workload {
    pub fn gemv(weight: TensorF32, bias: Option<TensorF32>, inputs: TensorF32, activation: Activation) -> Result<Self> {
        let (rows, cols) = dims2(&weight)?;
        let (timesteps, input_dim) = dims2(&inputs)?;
        if input_dim != cols {
            return Err(Error::ShapeMismatch {
                left: weight.shape().to_vec(),
                right: inputs.shape().to_vec(),
            });
        }
        Self::check_bias(&bias, rows)?;
        Ok(Workload {
            kind: WorkloadKind::Gemv,
            timesteps,
            input_dim,
            hidden: rows,
            weight,
            bias,
            inputs,
            activation,
        })
    }

    pub fn lstm(weight: TensorF32, bias: Option<TensorF32>, inputs: TensorF32) -> Result<Self> {
        let (rows, cols) = dims2(&weight)?;
        let (timesteps, input_dim) = dims2(&inputs)?;
        if rows % 4 != 0 || rows == 0 || cols != input_dim + rows / 4 {
            return Err(Error::ShapeMismatch {
                left: weight.shape().to_vec(),
                right: vec![
                    4 * (cols.saturating_sub(input_dim)),
                    input_dim + cols.saturating_sub(input_dim),
                ],
            });
        }
        Self::check_bias(&bias, rows)?;
        Ok(Workload {
            kind: WorkloadKind::Lstm,
            timesteps,
            input_dim,
            hidden: rows / 4,
            weight,
            bias,
            inputs,
            activation: Activation::Identity,
        })
    }

    fn check_bias(bias: &Option<TensorF32>, rows: usize) -> Result<()> {
        match bias {
            Some(b) if b.len() != rows => Err(Error::ShapeMismatch {
                left: vec![rows],
                right: b.shape().to_vec(),
            }),
            _ => Ok(()),
        }
    }

    pub fn kind(&self) -> WorkloadKind {
        self.kind
    }

    pub fn timesteps(&self) -> usize {
        self.timesteps
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn weight(&self) -> &TensorF32 {
        &self.weight
    }

    pub fn bias(&self) -> Option<&TensorF32> {
        self.bias.as_ref()
    }

    pub fn inputs(&self) -> &TensorF32 {
        &self.inputs
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    fn input(&self, t: usize) -> Vec<f64> {
        let d = self.input_dim;
        self.inputs.data()[t * d..(t + 1) * d]
            .iter()
            .map(|&v| f64::from(v))
            .collect()
    }

    fn bias_f64(&self) -> Vec<f64> {
        let rows = self.weight.shape()[0];
        self.bias
            .as_ref()
            .map_or(vec![0.0; rows], |b| b.data().iter().map(|&v| f64::from(v)).collect())
    }

    fn row_block(&self, block: usize) -> std::ops::Range<usize> {
        match self.kind {
            WorkloadKind::Gemv => 0..self.hidden,
            WorkloadKind::Lstm => block * self.hidden..(block + 1) * self.hidden,
        }
    }

    fn blocks(&self) -> &'static [Activation] {
        match self.kind {
            WorkloadKind::Gemv => &[Activation::Identity],
            WorkloadKind::Lstm => &LSTM_GATES,
        }
    }

    fn block_activation(&self, block: usize) -> Activation {
        match self.kind {
            WorkloadKind::Gemv => self.activation,
            WorkloadKind::Lstm => LSTM_GATES[block],
        }
    }
}

const LSTM_GATES: [Activation; 4] = [
    Activation::Sigmoid,
    Activation::Sigmoid,
    Activation::Tanh,
    Activation::Sigmoid,
];

/// Applies the LSTM cell update to gate outputs in `i, f, g, o` order.
fn lstm_cell(gates: &[f64], c: &mut [f64]) -> Vec<f64> {
    let h = c.len();
    (0..h)
        .map(|j| {
            let (i, f, g, o) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
            c[j] = f * c[j] + i * g;
            o * c[j].tanh()
        })
        .collect()
}

/// The unquantized `f64` evaluation of a workload.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRun {
    /// Per-step outputs: `y_t` for GEMV, `h_t` for LSTM.
    pub outputs: Vec<Vec<f64>>,
    /// Per-step vectors fed to the MAC array.
    pub mac_inputs: Vec<Vec<f64>>,
    /// Per-step post-activation values leaving the PE.
    pub pe_outputs: Vec<Vec<f64>>,
    /// Per-step `|W v + b|` maxima.
    pub preact_max: Vec<f64>,
}

pub fn reference_run(wl: &Workload) -> ReferenceRun {
    let rows = wl.weight.shape()[0];
    let cols = wl.weight.shape()[1];
    let w: Vec<f64> = wl.weight.data().iter().map(|&v| f64::from(v)).collect();
    let bias = wl.bias_f64();
    let mut h = vec![0.0; wl.hidden];
    let mut c = vec![0.0; wl.hidden];
    let mut run = ReferenceRun {
        outputs: Vec::with_capacity(wl.timesteps),
        mac_inputs: Vec::with_capacity(wl.timesteps),
        pe_outputs: Vec::with_capacity(wl.timesteps),
        preact_max: Vec::with_capacity(wl.timesteps),
    };
    for t in 0..wl.timesteps {
        let mut v = wl.input(t);
        if wl.kind == WorkloadKind::Lstm {
            v.extend_from_slice(&h);
        }
        let z: Vec<f64> = (0..rows)
            .map(|r| {
                w[r * cols..(r + 1) * cols]
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    + bias[r]
            })
            .collect();
        let mut out = vec![0.0; rows];
        for block in 0..wl.blocks().len() {
            let act = wl.block_activation(block);
            for r in wl.row_block(block) {
                out[r] = act.eval(z[r]);
            }
        }
        run.preact_max.push(z.iter().fold(0.0, |m, x| f64::max(m, x.abs())));
        let y = match wl.kind {
            WorkloadKind::Gemv => out.clone(),
            WorkloadKind::Lstm => {
                h = lstm_cell(&out, &mut c);
                h.clone()
            }
        };
        run.mac_inputs.push(v);
        run.pe_outputs.push(out);
        run.outputs.push(y);
    }
    run
}

/// Activation and output statistics from the first calibration steps of the
/// reference run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadCalibration {
    pub activation: CalibrationRecord,
    pub output: CalibrationRecord,
    /// Largest `|W v + b|` seen.
    pub preact_max: f64,
}

/// Calibrates on the first `batches` steps (all steps when `None`).
pub fn calibrate_workload(reference: &ReferenceRun, e: u8, batches: Option<usize>) -> Result<WorkloadCalibration> {
    let steps = batches
        .unwrap_or(reference.mac_inputs.len())
        .min(reference.mac_inputs.len());
    if steps == 0 {
        return Err(Error::config("calibration needs at least one step"));
    }
    let to_batches = |rows: &[Vec<f64>]| -> Result<Vec<TensorF32>> {
        rows[..steps]
            .iter()
            .map(|r| TensorF32::vector("calib", r.iter().map(|&v| v as f32).collect()))
            .collect()
    };
    Ok(WorkloadCalibration {
        activation: calibrate_activation_bias("activation", &to_batches(&reference.mac_inputs)?, e)?,
        output: calibrate_activation_bias("output", &to_batches(&reference.pe_outputs)?, e)?,
        preact_max: reference.preact_max[..steps].iter().fold(0.0, |m, &x| f64::max(m, x)),
    })
}

/// PE parameters shared by both kinds; `e` and the width mode only apply to
/// HFINT, `scale_bits` / `frac_bits` only to INT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PeSettings {
    pub n: u8,
    pub e: u8,
    pub lanes: u32,
    pub max_acc: u32,
    pub scale_bits: u32,
    pub frac_bits: u32,
    pub acc_width_mode: AccWidthMode,
    pub acc_width: Option<u32>,
    pub post_shift: Option<u32>,
}

impl Default for PeSettings {
    fn default() -> Self {
        PeSettings {
            n: 8,
            e: 3,
            lanes: 16,
            max_acc: 256,
            scale_bits: IntPeConfig::DEFAULT_SCALE_BITS,
            frac_bits: IntPeConfig::DEFAULT_FRAC_BITS,
            acc_width_mode: AccWidthMode::Paper,
            acc_width: None,
            post_shift: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkloadReport {
    pub pe: PeKind,
    pub kind: WorkloadKind,
    pub timesteps: usize,
    pub acc_width: u32,
    pub max_acc_bits: u32,
    pub per_step_mse: Vec<f64>,
    pub mean_mse: f64,
    pub calibration: WorkloadCalibration,
    /// HFINT: weight exp_bias; INT: weight scale.
    pub weight_bias_or_scale: f64,
    pub post_shift: Option<u32>,
    pub multiplier: Option<u64>,
    #[serde(skip)]
    pub outputs: Vec<Vec<f64>>,
    #[serde(skip)]
    pub trace: PeTrace,
}

enum Pipeline {
    Int {
        cfg: IntPeConfig,
        blocks: Vec<Matrix<i32>>,
        act: UniformParams,
        out: UniformParams,
        post: IntPostScale,
    },
    Hfint {
        cfg: HfintPeConfig,
        blocks: Vec<Matrix<u16>>,
        post: HfintPostStage,
    },
}

impl Pipeline {
    fn build(wl: &Workload, pe: PeKind, s: &PeSettings, cal: &WorkloadCalibration) -> Result<Self> {
        let cols = wl.weight.shape()[1];
        let w = wl.weight.data();
        let block_rows = |block: usize| wl.row_block(block).flat_map(move |r| &w[r * cols..(r + 1) * cols]);
        let nblocks = wl.blocks().len();
        match pe {
            PeKind::Int => {
                let mut cfg = IntPeConfig::new(s.n, s.lanes, s.max_acc, s.scale_bits, s.frac_bits)?;
                if let Some(width) = s.acc_width {
                    cfg = cfg.with_acc_width(width)?;
                }
                let wq = UniformParams::fitted(s.n, wl.weight.max_abs())?;
                let act = UniformParams::fitted(s.n, cal.activation.observed_max)?;
                let out = UniformParams::fitted(s.n, cal.output.observed_max)?;
                let blocks = (0..nblocks)
                    .map(|b| {
                        let data = block_rows(b).map(|&v| wq.quantize_level(f64::from(v))).collect();
                        Matrix::new(wl.hidden, cols, data)
                    })
                    .collect::<Result<_>>()?;
                let (acc_step, out_step) = (wq.scale() * act.scale(), out.scale());
                let post = if (0..nblocks).any(|b| wl.block_activation(b).is_integer_domain()) {
                    IntPostScale::new(&cfg, acc_step, out_step)?
                } else {
                    IntPostScale::clamped(&cfg, acc_step, out_step)?
                };
                Ok(Pipeline::Int {
                    cfg,
                    blocks,
                    act,
                    out,
                    post,
                })
            }
            PeKind::Hfint => {
                let weight_bias = derive_exp_bias(wl.weight.max_abs(), s.e).unwrap_or(0);
                let mut cfg = HfintPeConfig::new(s.n, s.e, s.lanes, s.max_acc, s.acc_width_mode)?.with_biases(
                    weight_bias,
                    cal.activation.exp_bias,
                    cal.output.exp_bias,
                )?;
                if let Some(width) = s.acc_width {
                    cfg = cfg.with_acc_width(width)?;
                }
                let wp = cfg.weight_params();
                let blocks = (0..nblocks)
                    .map(|b| {
                        let data = block_rows(b).map(|&v| wp.quantize_value(f64::from(v))).collect();
                        Matrix::new(wl.hidden, cols, data)
                    })
                    .collect::<Result<_>>()?;
                let post = match s.post_shift {
                    Some(r) => HfintPostStage::new(r),
                    None => HfintPostStage::calibrated(&cfg, cal.preact_max),
                };
                Ok(Pipeline::Hfint { cfg, blocks, post })
            }
        }
    }

    /// Requantizes `v` onto the activation grid.
    fn requantize_act(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Pipeline::Int { act, .. } => v
                .iter()
                .map(|&x| f64::from(act.quantize_level(x)) * act.scale())
                .collect(),
            Pipeline::Hfint { cfg, .. } => {
                let p = cfg.act_params();
                v.iter().map(|&x| p.decode(p.quantize_value(x))).collect()
            }
        }
    }

    /// One pass of every row block; returns dequantized PE outputs.
    fn step(&self, wl: &Workload, v: &[f64], bias: &[f64], trace: &mut PeTrace) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(bias.len());
        match self {
            Pipeline::Int {
                cfg,
                blocks,
                act,
                out: outp,
                post,
            } => {
                let x: Vec<i32> = v.iter().map(|&x| act.quantize_level(x)).collect();
                for (b, w) in blocks.iter().enumerate() {
                    let levels = int_pe_run(
                        cfg,
                        w,
                        &x,
                        post,
                        wl.block_activation(b),
                        Some(&bias[wl.row_block(b)]),
                        trace,
                    )?;
                    out.extend(levels.into_iter().map(|l| f64::from(l) * outp.scale()));
                }
            }
            Pipeline::Hfint { cfg, blocks, post } => {
                let ap = cfg.act_params();
                let op = cfg.out_params();
                let x: Vec<u16> = v.iter().map(|&x| ap.quantize_value(x)).collect();
                for (b, w) in blocks.iter().enumerate() {
                    let codes = hfint_pe_run(
                        cfg,
                        w,
                        &x,
                        post,
                        wl.block_activation(b),
                        Some(&bias[wl.row_block(b)]),
                        trace,
                    )?;
                    out.extend(codes.into_iter().map(|c| op.decode(c)));
                }
            }
        }
        Ok(out)
    }

    fn acc_width(&self) -> u32 {
        match self {
            Pipeline::Int { cfg, .. } => cfg.acc_width(),
            Pipeline::Hfint { cfg, .. } => cfg.acc_width(),
        }
    }
}

/// Runs `wl` through the chosen PE. Calibration comes from `calibration`
/// when given, otherwise from the reference run's first `calib_batches`
/// steps.
pub fn run_workload(
    wl: &Workload,
    pe: PeKind,
    settings: &PeSettings,
    calibration: Option<&WorkloadCalibration>,
    calib_batches: Option<usize>,
) -> Result<WorkloadReport> {
    let reference = reference_run(wl);
    let calibration = match calibration {
        Some(c) => c.clone(),
        None => calibrate_workload(&reference, settings.e, calib_batches)?,
    };
    let pipeline = Pipeline::build(wl, pe, settings, &calibration)?;
    let bias = wl.bias_f64();
    let mut trace = PeTrace::new();
    let mut h = vec![0.0; wl.hidden];
    let mut c = vec![0.0; wl.hidden];
    let mut outputs = Vec::with_capacity(wl.timesteps);
    let mut per_step_mse = Vec::with_capacity(wl.timesteps);
    for t in 0..wl.timesteps {
        let mut v = wl.input(t);
        if wl.kind == WorkloadKind::Lstm {
            v.extend_from_slice(&h);
        }
        let pe_out = pipeline.step(wl, &v, &bias, &mut trace)?;
        let y = match wl.kind {
            WorkloadKind::Gemv => pe_out,
            WorkloadKind::Lstm => {
                h = pipeline.requantize_act(&lstm_cell(&pe_out, &mut c));
                h.clone()
            }
        };
        per_step_mse.push(mse(&y, &reference.outputs[t]));
        outputs.push(y);
    }
    let mean_mse = if per_step_mse.is_empty() {
        0.0
    } else {
        per_step_mse.iter().sum::<f64>() / per_step_mse.len() as f64
    };
    let (weight_bias_or_scale, post_shift, multiplier) = match &pipeline {
        Pipeline::Int { post, .. } => (
            UniformParams::fitted(settings.n, wl.weight.max_abs())?.scale(),
            None,
            Some(post.multiplier()),
        ),
        Pipeline::Hfint { cfg, post, .. } => (f64::from(cfg.weight_params().exp_bias()), Some(post.shift), None),
    };
    Ok(WorkloadReport {
        pe,
        kind: wl.kind,
        timesteps: wl.timesteps,
        acc_width: pipeline.acc_width(),
        max_acc_bits: trace.max_acc_bits(),
        per_step_mse,
        mean_mse,
        calibration,
        weight_bias_or_scale,
        post_shift,
        multiplier,
        outputs,
        trace,
    })
}

fn mse(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// Shape and seed of the synthetic wide-weight LSTM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LstmSynthConfig {
    pub hidden: usize,
    pub input_dim: usize,
    pub timesteps: usize,
    pub seed: u64,
    pub weight_sigma: f64,
    /// Fraction of weights, in thousandths, replaced by outliers.
    pub outlier_permille: u32,
    pub outlier_max: f64,
    pub input_clip: f64,
}

impl Default for LstmSynthConfig {
    fn default() -> Self {
        LstmSynthConfig {
            hidden: 32,
            input_dim: 16,
            timesteps: 100,
            seed: crate::analyzer::synth::DEFAULT_SEED,
            weight_sigma: 0.15,
            outlier_permille: 10,
            outlier_max: 4.0,
            input_clip: 3.0,
        }
    }
}

/// Gaussian weights with rare large outliers (one pinned at `outlier_max`),
/// small Gaussian gate biases and clipped standard-normal inputs.
pub fn synthetic_lstm(cfg: &LstmSynthConfig) -> Result<Workload> {
    if cfg.hidden == 0 || cfg.input_dim == 0 {
        return Err(Error::config("LSTM needs nonzero hidden and input sizes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let rows = 4 * cfg.hidden;
    let cols = cfg.input_dim + cfg.hidden;
    let body = Normal::new(0.0, cfg.weight_sigma).map_err(|e| Error::config(e.to_string()))?;
    let p = f64::from(cfg.outlier_permille) / 1000.0;
    let mut w: Vec<f32> = (0..rows * cols)
        .map(|_| {
            if rng.random::<f64>() < p {
                let mag = rng.random_range(1.0..=cfg.outlier_max.max(1.0));
                (if rng.random::<bool>() { mag } else { -mag }) as f32
            } else {
                body.sample(&mut rng) as f32
            }
        })
        .collect();
    let pin = rng.random_range(0..w.len());
    w[pin] = cfg.outlier_max as f32;
    let b: Vec<f32> = (0..rows).map(|_| (0.1 * sample_std(&mut rng)) as f32).collect();
    let x: Vec<f32> = (0..cfg.timesteps * cfg.input_dim)
        .map(|_| sample_std(&mut rng).clamp(-cfg.input_clip, cfg.input_clip) as f32)
        .collect();
    Workload::lstm(
        TensorF32::new("lstm.weight", vec![rows, cols], w)?,
        Some(TensorF32::vector("lstm.bias", b)?),
        TensorF32::new("lstm.inputs", vec![cfg.timesteps, cfg.input_dim], x)?,
    )
}

fn sample_std(rng: &mut ChaCha8Rng) -> f64 {
    rand_distr::StandardNormal.sample(rng)
}

/// Identity weights and integer inputs in `[-31, 31]` (one pinned at 31),
/// identity activation.
pub fn identity_gemv(dim: usize, timesteps: usize, seed: u64) -> Result<Workload> {
    if dim == 0 || timesteps == 0 {
        return Err(Error::config("identity GEMV needs nonzero size"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f32> = (0..dim * dim)
        .map(|i| if i / dim == i % dim { 1.0 } else { 0.0 })
        .collect();
    let mut x: Vec<f32> = (0..dim * timesteps)
        .map(|_| rng.random_range(-31i32..=31) as f32)
        .collect();
    x[0] = 31.0;
    Workload::gemv(
        TensorF32::new("gemv.weight", vec![dim, dim], w)?,
        None,
        TensorF32::new("gemv.inputs", vec![timesteps, dim], x)?,
        Activation::Identity,
    )
}
