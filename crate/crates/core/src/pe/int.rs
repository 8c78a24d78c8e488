use serde::Serialize;

use super::{
    accumulate, check_dims, saturate, Activation, Matrix, OverflowReport, PeKind, PeTrace, Stage, TraceRecord,
};
use crate::bits::{ceil_log2, fits_signed, round_half_away, shift_round, signed_bits};
use crate::error::{Error, Result};

/// Integer PE: n-bit operands, an `acc_width` accumulator and an
/// `acc_width + S` register for the product with the S-bit post-scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntPeConfig {
    n: u8,
    lanes: u32,
    max_acc: u32,
    scale_bits: u32,
    frac_bits: u32,
    acc_width: u32,
    scaled_width: u32,
}

impl IntPeConfig {
    pub const DEFAULT_SCALE_BITS: u32 = 16;
    pub const DEFAULT_FRAC_BITS: u32 = 15;

    pub fn new(n: u8, lanes: u32, max_acc: u32, scale_bits: u32, frac_bits: u32) -> Result<Self> {
        if !(2..=16).contains(&n) {
            return Err(Error::config(format!("INT PE operand width must be 2..=16, got {n}")));
        }
        if lanes == 0 || max_acc == 0 {
            return Err(Error::config("lanes and max accumulation count must be at least 1"));
        }
        if !(1..=32).contains(&scale_bits) || frac_bits >= scale_bits {
            return Err(Error::config(format!(
                "scale needs 1..=32 bits with fewer fractional bits, got S={scale_bits} F={frac_bits}"
            )));
        }
        let acc_width = 2 * u32::from(n) + ceil_log2(u64::from(max_acc));
        Self {
            n,
            lanes,
            max_acc,
            scale_bits,
            frac_bits,
            acc_width,
            scaled_width: acc_width + scale_bits,
        }
        .checked()
    }

    /// `S = 16`, `F = 15`.
    pub fn with_defaults(n: u8, lanes: u32, max_acc: u32) -> Result<Self> {
        Self::new(n, lanes, max_acc, Self::DEFAULT_SCALE_BITS, Self::DEFAULT_FRAC_BITS)
    }

    /// Overrides the accumulator width; the scaled register follows.
    pub fn with_acc_width(self, acc_width: u32) -> Result<Self> {
        Self {
            acc_width,
            scaled_width: acc_width + self.scale_bits,
            ..self
        }
        .checked()
    }

    fn checked(self) -> Result<Self> {
        if self.acc_width == 0 || self.scaled_width > super::MAX_REGISTER_BITS {
            return Err(Error::config(format!(
                "register widths {}/{} outside 1..={}",
                self.acc_width,
                self.scaled_width,
                super::MAX_REGISTER_BITS
            )));
        }
        Ok(self)
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn lanes(&self) -> u32 {
        self.lanes
    }

    pub fn max_acc(&self) -> u32 {
        self.max_acc
    }

    pub fn scale_bits(&self) -> u32 {
        self.scale_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn acc_width(&self) -> u32 {
        self.acc_width
    }

    pub fn scaled_width(&self) -> u32 {
        self.scaled_width
    }

    /// `2n + ceil(log2 H)`, which holds `H` products of `-2^(n-1)`.
    pub fn sufficient_width(&self) -> u32 {
        2 * u32::from(self.n) + ceil_log2(u64::from(self.max_acc))
    }

    /// Operands span the full two's-complement range.
    pub fn operand_range(&self) -> (i32, i32) {
        let half = 1i32 << (self.n - 1);
        (-half, half - 1)
    }

    pub fn output_max(&self) -> i32 {
        (1i32 << (self.n - 1)) - 1
    }

    fn check_operands(&self, what: &str, v: &[i32]) -> Result<()> {
        let (lo, hi) = self.operand_range();
        match v.iter().find(|x| !(lo..=hi).contains(*x)) {
            Some(bad) => Err(Error::config(format!(
                "{what} operand {bad} outside {}-bit range",
                self.n
            ))),
            None => Ok(()),
        }
    }
}

/// Post-accumulator stage of the INT PE. `multiplier` is the unsigned S-bit
/// fixed-point scale with `F` fractional bits; `acc_step` is the real value
/// of one accumulator LSB and `output_step` of one output integer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntPostScale {
    multiplier: u64,
    acc_step: f64,
    output_step: f64,
}

impl IntPostScale {
    /// Scale chosen as `acc_step / output_step`, rounded to `F` fractional bits.
    pub fn new(cfg: &IntPeConfig, acc_step: f64, output_step: f64) -> Result<Self> {
        if !(acc_step > 0.0 && output_step > 0.0 && acc_step.is_finite() && output_step.is_finite()) {
            return Err(Error::config("post-scale steps must be positive and finite"));
        }
        let ratio = acc_step / output_step;
        let multiplier = round_half_away(ratio * 2f64.powi(cfg.frac_bits as i32));
        if multiplier >= 2f64.powi(cfg.scale_bits as i32) {
            return Err(Error::config(format!(
                "post-scale {ratio} does not fit an unsigned {}-bit scale with {} fractional bits",
                cfg.scale_bits, cfg.frac_bits
            )));
        }
        Ok(IntPostScale {
            multiplier: multiplier as u64,
            acc_step,
            output_step,
        })
    }

    /// Like [`new`](Self::new) but clamps the multiplier into `1..2^S`; for
    /// activations evaluated on the dequantized accumulator, where the
    /// multiplier only feeds the trace.
    pub fn clamped(cfg: &IntPeConfig, acc_step: f64, output_step: f64) -> Result<Self> {
        match Self::new(cfg, acc_step, output_step) {
            Err(Error::Config(_)) if acc_step > 0.0 && output_step > 0.0 => Ok(IntPostScale {
                multiplier: (1u64 << cfg.scale_bits) - 1,
                acc_step,
                output_step,
            }),
            other => other.map(|p| IntPostScale {
                multiplier: p.multiplier.max(1),
                ..p
            }),
        }
    }

    /// A raw S-bit multiplier; one output integer is worth `1.0`.
    pub fn from_multiplier(cfg: &IntPeConfig, multiplier: u64) -> Result<Self> {
        if multiplier >> cfg.scale_bits != 0 {
            return Err(Error::config(format!(
                "multiplier {multiplier} exceeds {} bits",
                cfg.scale_bits
            )));
        }
        Ok(IntPostScale {
            multiplier,
            acc_step: multiplier as f64 / 2f64.powi(cfg.frac_bits as i32),
            output_step: 1.0,
        })
    }

    pub fn multiplier(&self) -> u64 {
        self.multiplier
    }

    pub fn acc_step(&self) -> f64 {
        self.acc_step
    }

    pub fn output_step(&self) -> f64 {
        self.output_step
    }
}

/// One pass of `act(W x)` on the INT PE, with a fresh trace.
pub fn int_pe_forward(
    cfg: &IntPeConfig,
    w: &Matrix<i32>,
    x: &[i32],
    post: &IntPostScale,
    act: Activation,
) -> Result<(Vec<i32>, PeTrace)> {
    let mut trace = PeTrace::new();
    let out = int_pe_run(cfg, w, x, post, act, None, &mut trace)?;
    Ok((out, trace))
}

/// Appends one pass to `trace`. `offsets` are per-row real-valued biases
/// added after the accumulator.
pub fn int_pe_run(
    cfg: &IntPeConfig,
    w: &Matrix<i32>,
    x: &[i32],
    post: &IntPostScale,
    act: Activation,
    offsets: Option<&[f64]>,
    trace: &mut PeTrace,
) -> Result<Vec<i32>> {
    check_dims(w, x, cfg.max_acc, offsets)?;
    cfg.check_operands("weight", w.data())?;
    cfg.check_operands("activation", x)?;
    let n = cfg.n;
    let code_mask = (1u32 << n) - 1;
    let mut out = Vec::with_capacity(w.rows());
    for r in 0..w.rows() {
        let step = trace.next_step();
        let overflow = |trace: &mut PeTrace, stage, width, value: i128| {
            trace.push(
                TraceRecord {
                    step,
                    acc: value,
                    post_scale: 0,
                    output_code: 0,
                    overflow: true,
                },
                signed_bits(value),
            );
            Error::Overflow(Box::new(OverflowReport {
                pe: PeKind::Int,
                stage,
                step,
                width,
                value,
                required_width: signed_bits(value),
                sufficient_width: match stage {
                    Stage::Accumulator => cfg.sufficient_width(),
                    Stage::Scaled => cfg.sufficient_width() + cfg.scale_bits,
                },
                trace: trace.clone(),
            }))
        };
        let products = w.row(r).iter().zip(x).map(|(&a, &b)| i128::from(a) * i128::from(b));
        let (acc, occupancy) = accumulate(products, cfg.lanes as usize, cfg.acc_width)
            .map_err(|v| overflow(trace, Stage::Accumulator, cfg.acc_width, v))?;
        let scaled = acc * i128::from(post.multiplier);
        if !fits_signed(scaled, cfg.scaled_width) {
            return Err(overflow(trace, Stage::Scaled, cfg.scaled_width, scaled));
        }
        let shifted = shift_round(scaled, cfg.frac_bits);
        let offset = offsets.map_or(0.0, |o| o[r]);
        let level = if act.is_integer_domain() {
            let biased = shifted + round_half_away(offset / post.output_step) as i128;
            act.eval_int(saturate(biased, n))
        } else {
            let y = act.eval(acc as f64 * post.acc_step + offset);
            saturate(round_half_away(y / post.output_step) as i128, n)
        } as i32;
        trace.push(
            TraceRecord {
                step,
                acc,
                post_scale: shifted,
                output_code: (level as u32 & code_mask) as u16,
                overflow: false,
            },
            occupancy,
        );
        out.push(level);
    }
    Ok(out)
}
