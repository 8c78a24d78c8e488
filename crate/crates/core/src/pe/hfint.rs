use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    accumulate, check_dims, saturate, Activation, Matrix, OverflowReport, PeKind, PeTrace, Stage, TraceRecord,
};
use crate::adaptivfloat::AdaptivFloatParams;
use crate::bits::{ceil_log2, pow2, round_half_away, shift_round, signed_bits};
use crate::error::{Error, Result};

/// Which accumulator width formula a config starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccWidthMode {
    /// `2(2^e - 1) + 2m + ceil(log2 H)`.
    #[default]
    Paper,
    /// `2(2^e - 1) + 2(m + 1) + ceil(log2 H) + 1`: hidden bits and sign included.
    Checked,
}

impl fmt::Display for AccWidthMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AccWidthMode::Paper => "paper",
            AccWidthMode::Checked => "checked",
        })
    }
}

impl FromStr for AccWidthMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(AccWidthMode::Paper),
            "checked" => Ok(AccWidthMode::Checked),
            other => Err(Error::config(format!("unknown accumulator width mode `{other}`"))),
        }
    }
}

/// Hybrid float-integer PE over AdaptivFloat<n,e> operands. The three
/// exponent biases live in 4-bit signed registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HfintPeConfig {
    n: u8,
    e: u8,
    lanes: u32,
    max_acc: u32,
    weight_bias: i32,
    act_bias: i32,
    out_bias: i32,
    mode: AccWidthMode,
    acc_width: u32,
}

impl HfintPeConfig {
    pub const BIAS_RANGE: std::ops::RangeInclusive<i32> = -8..=7;

    /// All biases start at 0; see [`with_biases`](Self::with_biases).
    pub fn new(n: u8, e: u8, lanes: u32, max_acc: u32, mode: AccWidthMode) -> Result<Self> {
        AdaptivFloatParams::new(n, e, 0)?;
        if lanes == 0 || max_acc == 0 {
            return Err(Error::config("lanes and max accumulation count must be at least 1"));
        }
        let mut cfg = HfintPeConfig {
            n,
            e,
            lanes,
            max_acc,
            weight_bias: 0,
            act_bias: 0,
            out_bias: 0,
            mode,
            acc_width: 0,
        };
        if cfg.checked_width() > super::MAX_REGISTER_BITS {
            return Err(Error::config(format!(
                "HFINT<{n},{e}> with H={max_acc} needs a {}-bit accumulator, above the {}-bit limit",
                cfg.checked_width(),
                super::MAX_REGISTER_BITS
            )));
        }
        cfg.acc_width = match mode {
            AccWidthMode::Paper => cfg.paper_width(),
            AccWidthMode::Checked => cfg.checked_width(),
        };
        Ok(cfg)
    }

    pub fn with_biases(self, weight_bias: i32, act_bias: i32, out_bias: i32) -> Result<Self> {
        for (what, b) in [("weight", weight_bias), ("activation", act_bias), ("output", out_bias)] {
            if !Self::BIAS_RANGE.contains(&b) {
                return Err(Error::config(format!(
                    "{what} exp_bias {b} does not fit a 4-bit signed register"
                )));
            }
        }
        Ok(HfintPeConfig {
            weight_bias,
            act_bias,
            out_bias,
            ..self
        })
    }

    pub fn with_acc_width(self, acc_width: u32) -> Result<Self> {
        if !(1..=super::MAX_REGISTER_BITS).contains(&acc_width) {
            return Err(Error::config(format!("accumulator width {acc_width} unsupported")));
        }
        Ok(HfintPeConfig { acc_width, ..self })
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn e(&self) -> u8 {
        self.e
    }

    pub fn m(&self) -> u8 {
        self.n - self.e - 1
    }

    pub fn lanes(&self) -> u32 {
        self.lanes
    }

    pub fn max_acc(&self) -> u32 {
        self.max_acc
    }

    pub fn mode(&self) -> AccWidthMode {
        self.mode
    }

    pub fn acc_width(&self) -> u32 {
        self.acc_width
    }

    fn exp_span(&self) -> u32 {
        2 * ((1u32 << self.e) - 1)
    }

    pub fn paper_width(&self) -> u32 {
        self.exp_span() + 2 * u32::from(self.m()) + ceil_log2(u64::from(self.max_acc))
    }

    pub fn checked_width(&self) -> u32 {
        self.exp_span() + 2 * (u32::from(self.m()) + 1) + ceil_log2(u64::from(self.max_acc)) + 1
    }

    pub fn weight_params(&self) -> AdaptivFloatParams {
        self.params(self.weight_bias)
    }

    pub fn act_params(&self) -> AdaptivFloatParams {
        self.params(self.act_bias)
    }

    pub fn out_params(&self) -> AdaptivFloatParams {
        self.params(self.out_bias)
    }

    fn params(&self, bias: i32) -> AdaptivFloatParams {
        AdaptivFloatParams::new(self.n, self.e, bias).expect("validated in new")
    }

    /// The accumulator holds multiples of `2^(bias_W + bias_A - 2m)`.
    pub fn acc_lsb_exp(&self) -> i32 {
        self.weight_bias + self.act_bias - 2 * i32::from(self.m())
    }

    /// Signed mantissa product of two codes, aligned by the summed
    /// exponent fields.
    pub fn lane_product(&self, w: u16, x: u16) -> i128 {
        let (wp, xp) = (self.weight_params(), self.act_params());
        if wp.is_zero_code(w) || xp.is_zero_code(x) {
            return 0;
        }
        let hidden = 1i128 << self.m();
        let (ws, we, wm) = wp.fields(w);
        let (xs, xe, xm) = xp.fields(x);
        let mag = ((hidden + i128::from(wm)) * (hidden + i128::from(xm))) << (we + xe);
        if ws != xs {
            -mag
        } else {
            mag
        }
    }

    fn check_codes(&self, what: &str, codes: &[u16]) -> Result<()> {
        match codes.iter().find(|&&c| c >> self.n != 0) {
            Some(bad) => Err(Error::config(format!(
                "{what} code {bad:#x} wider than {} bits",
                self.n
            ))),
            None => Ok(()),
        }
    }
}

/// Post-accumulator arithmetic shift `r`, chosen by calibration so the n-bit
/// integer window covers the observed output range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HfintPostStage {
    pub shift: u32,
}

impl HfintPostStage {
    pub fn new(shift: u32) -> Self {
        HfintPostStage { shift }
    }

    /// Smallest `r` with `|max_abs| / 2^lsb` shifted by `r` inside the
    /// saturating range.
    pub fn calibrated(cfg: &HfintPeConfig, max_abs: f64) -> Self {
        let limit = (1i128 << (cfg.n - 1)) - 1;
        let ticks = (max_abs.abs() * pow2(-cfg.acc_lsb_exp())).ceil();
        if !ticks.is_finite() || ticks <= limit as f64 {
            return HfintPostStage { shift: 0 };
        }
        let ticks = ticks as i128;
        let shift = (0..127).find(|&r| shift_round(ticks, r) <= limit).unwrap_or(127);
        HfintPostStage { shift }
    }

    /// Real value of one post-shift integer.
    pub fn step_exp(&self, cfg: &HfintPeConfig) -> i32 {
        cfg.acc_lsb_exp() + self.shift as i32
    }
}

/// One pass of `act(W x)` on the HFINT PE, with a fresh trace.
pub fn hfint_pe_forward(
    cfg: &HfintPeConfig,
    w: &Matrix<u16>,
    x: &[u16],
    post: &HfintPostStage,
    act: Activation,
) -> Result<(Vec<u16>, PeTrace)> {
    let mut trace = PeTrace::new();
    let out = hfint_pe_run(cfg, w, x, post, act, None, &mut trace)?;
    Ok((out, trace))
}

/// Appends one pass to `trace`; outputs are AdaptivFloat codes under the
/// output bias. `offsets` are per-row real biases added after accumulation.
pub fn hfint_pe_run(
    cfg: &HfintPeConfig,
    w: &Matrix<u16>,
    x: &[u16],
    post: &HfintPostStage,
    act: Activation,
    offsets: Option<&[f64]>,
    trace: &mut PeTrace,
) -> Result<Vec<u16>> {
    check_dims(w, x, cfg.max_acc, offsets)?;
    cfg.check_codes("weight", w.data())?;
    cfg.check_codes("activation", x)?;
    let out_params = cfg.out_params();
    let lsb = cfg.acc_lsb_exp();
    let step_exp = post.step_exp(cfg);
    let mut out = Vec::with_capacity(w.rows());
    for r in 0..w.rows() {
        let step = trace.next_step();
        let products = w.row(r).iter().zip(x).map(|(&a, &b)| cfg.lane_product(a, b));
        let (acc, occupancy) = accumulate(products, cfg.lanes as usize, cfg.acc_width).map_err(|value| {
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
                pe: PeKind::Hfint,
                stage: Stage::Accumulator,
                step,
                width: cfg.acc_width,
                value,
                required_width: signed_bits(value),
                sufficient_width: cfg.checked_width(),
                trace: trace.clone(),
            }))
        })?;
        let shifted = shift_round(acc, post.shift);
        let offset = offsets.map_or(0.0, |o| o[r]);
        let code = if act.is_integer_domain() {
            let biased = shifted + round_half_away(offset * pow2(-step_exp)) as i128;
            let v = act.eval_int(saturate(biased, cfg.n));
            out_params.quantize_value(v as f64 * pow2(step_exp))
        } else {
            out_params.quantize_value(act.eval(acc as f64 * pow2(lsb) + offset))
        };
        trace.push(
            TraceRecord {
                step,
                acc,
                post_scale: shifted,
                output_code: code,
                overflow: false,
            },
            occupancy,
        );
        out.push(code);
    }
    Ok(out)
}
