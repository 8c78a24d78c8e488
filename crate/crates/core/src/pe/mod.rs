//! Bit-accurate functional models of an integer PE and a hybrid
//! float-integer (HFINT) PE, plus a small weight-stationary workload runner.
//!
//! Both datapaths keep every register as an `i128` and check it against its
//! declared width after each update, so an overflow is reported rather than
//! silently wrapped.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod hfint;
mod int;
mod probe;
mod trace;
pub mod workload;

pub use hfint::{hfint_pe_forward, hfint_pe_run, AccWidthMode, HfintPeConfig, HfintPostStage};
pub use int::{int_pe_forward, int_pe_run, IntPeConfig, IntPostScale};
pub use probe::{adversarial_hfint, adversarial_int, probe_hfint, probe_int, WidthProbe};
pub use trace::{PeTrace, TraceRecord};

/// Largest register the simulator models.
pub const MAX_REGISTER_BITS: u32 = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
    Tanh,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        }
    }

    /// Identity and ReLU run on the saturated n-bit integer; the others are
    /// evaluated in `f64` on the dequantized accumulator.
    pub fn is_integer_domain(self) -> bool {
        matches!(self, Activation::Identity | Activation::Relu)
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Tanh => x.tanh(),
        }
    }

    pub(crate) fn eval_int(self, v: i128) -> i128 {
        match self {
            Activation::Relu => v.max(0),
            _ => v,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "identity" | "none" | "linear" => Ok(Activation::Identity),
            "relu" => Ok(Activation::Relu),
            "sigmoid" => Ok(Activation::Sigmoid),
            "tanh" => Ok(Activation::Tanh),
            other => Err(Error::config(format!("unknown activation `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PeKind {
    Int,
    Hfint,
}

impl PeKind {
    pub fn name(self) -> &'static str {
        match self {
            PeKind::Int => "int",
            PeKind::Hfint => "hfint",
        }
    }
}

impl fmt::Display for PeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "int" => Ok(PeKind::Int),
            "hfint" => Ok(PeKind::Hfint),
            other => Err(Error::config(format!(
                "unknown PE kind `{other}` (expected int or hfint)"
            ))),
        }
    }
}

/// Datapath register that can overflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Accumulator,
    Scaled,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Accumulator => "accumulator",
            Stage::Scaled => "scaled register",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverflowReport {
    pub pe: PeKind,
    pub stage: Stage,
    /// Trace step of the output being computed.
    pub step: usize,
    pub width: u32,
    pub value: i128,
    /// Bits needed for `value`.
    pub required_width: u32,
    /// Width that holds any legal operand stream for this configuration.
    pub sufficient_width: u32,
    /// Everything recorded up to and including the failing step.
    pub trace: PeTrace,
}

impl fmt::Display for OverflowReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} PE {} overflow at step {}: value {} needs {} bits but the register has {} (minimal sufficient width {})",
            self.pe, self.stage, self.step, self.value, self.required_width, self.width, self.sufficient_width
        )
    }
}

/// Row-major matrix of operands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::ShapeMismatch {
                left: vec![rows, cols],
                right: vec![data.len()],
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

pub(crate) fn check_dims<T: Copy, U>(w: &Matrix<T>, x: &[U], max_acc: u32, offsets: Option<&[f64]>) -> Result<()> {
    if w.cols() != x.len() {
        return Err(Error::ShapeMismatch {
            left: vec![w.rows(), w.cols()],
            right: vec![x.len()],
        });
    }
    if w.cols() as u64 > u64::from(max_acc) {
        return Err(Error::config(format!(
            "{} accumulations exceed the configured maximum H = {max_acc}",
            w.cols()
        )));
    }
    if let Some(o) = offsets {
        if o.len() != w.rows() {
            return Err(Error::ShapeMismatch {
                left: vec![w.rows()],
                right: vec![o.len()],
            });
        }
    }
    Ok(())
}

/// Accumulates one output: products arrive `lanes` at a time, each cycle's
/// adder-tree sum and the running accumulator are checked against `width`.
/// On overflow returns the offending value.
pub(crate) fn accumulate(
    products: impl Iterator<Item = i128>,
    lanes: usize,
    width: u32,
) -> std::result::Result<(i128, u32), i128> {
    let mut acc: i128 = 0;
    let mut occupancy = 1;
    let mut lane = 0;
    let mut tree: i128 = 0;
    let mut flush = |tree: i128, acc: &mut i128| -> std::result::Result<(), i128> {
        if !crate::bits::fits_signed(tree, width) {
            return Err(tree);
        }
        *acc += tree;
        if !crate::bits::fits_signed(*acc, width) {
            return Err(*acc);
        }
        occupancy = occupancy.max(crate::bits::signed_bits(*acc));
        Ok(())
    };
    for p in products {
        tree += p;
        lane += 1;
        if lane == lanes {
            flush(tree, &mut acc)?;
            tree = 0;
            lane = 0;
        }
    }
    if lane > 0 {
        flush(tree, &mut acc)?;
    }
    Ok((acc, occupancy))
}

/// Saturates to the symmetric n-bit range `±(2^(n-1) - 1)`.
pub(crate) fn saturate(v: i128, n: u8) -> i128 {
    let max = (1i128 << (n - 1)) - 1;
    v.clamp(-max, max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accumulate_groups_by_lane() {
        let (acc, occ) = accumulate([1i128, 2, 3, 4, 5].into_iter(), 2, 8).unwrap();
        assert_eq!(acc, 15);
        assert_eq!(occ, 5);
        assert_eq!(accumulate([100i128, 100].into_iter(), 1, 8), Err(200));
        assert_eq!(accumulate([-128i128].into_iter(), 4, 8), Ok((-128, 8)));
    }

    #[test]
    fn activation_parsing() {
        assert_eq!("ReLU".parse::<Activation>().unwrap(), Activation::Relu);
        assert!("gelu".parse::<Activation>().is_err());
        assert_eq!("hfint".parse::<PeKind>().unwrap(), PeKind::Hfint);
        assert_eq!(Activation::Relu.eval_int(-5), 0);
        assert_eq!(Activation::Sigmoid.eval(0.0), 0.5);
    }

    #[test]
    fn matrix_shape_checked() {
        assert!(Matrix::new(2, 3, vec![0i32; 5]).is_err());
        let m = Matrix::new(2, 2, vec![1, 2, 3, 4]).unwrap();
        assert_eq!(m.row(1), &[3, 4]);
    }
}
