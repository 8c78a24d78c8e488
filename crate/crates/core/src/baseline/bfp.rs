use serde::Serialize;

use super::sign_magnitude;
use crate::bits::{floor_log2, pow2, round_half_away};
use crate::codec::QuantParams;
use crate::error::{Error, Result};
use crate::format::{FormatKind, FormatSpec};
use crate::par::{self, Execution};
use crate::tensor::{QuantizedTensor, TensorF32};

/// Whole-tensor block floating-point: one shared exponent `E` with
/// `2^E <= max|W| < 2^(E+1)` and signed `(n-1)`-bit mantissas on the grid
/// `2^(E + 1 - (n-1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct BfpParams {
    n: u8,
    shared_exp: i32,
}

impl BfpParams {
    pub fn new(n: u8, shared_exp: i32) -> Result<Self> {
        FormatSpec::new(FormatKind::BlockFloat, n, 0)?;
        Ok(BfpParams { n, shared_exp })
    }

    /// A zero tensor records `E = 0`.
    pub fn fitted(n: u8, max_abs: f64) -> Result<Self> {
        let e = if max_abs > 0.0 { floor_log2(max_abs) } else { 0 };
        Self::new(n, e)
    }

    pub fn spec(&self) -> FormatSpec {
        FormatSpec {
            kind: FormatKind::BlockFloat,
            n: self.n,
            e: 0,
        }
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn shared_exp(&self) -> i32 {
        self.shared_exp
    }

    pub fn step(&self) -> f64 {
        pow2(self.shared_exp + 2 - i32::from(self.n))
    }

    pub fn level(&self, bits: u16) -> i32 {
        sign_magnitude::level(bits, self.n)
    }

    pub fn decode(&self, bits: u16) -> f64 {
        f64::from(self.level(bits)) * self.step()
    }

    pub fn encode(&self, x: f64) -> Result<u16> {
        let level = x / self.step();
        if level.fract() != 0.0 || level.abs() > f64::from(sign_magnitude::max_level(self.n)) {
            return Err(Error::NotRepresentable {
                value: x,
                format: format!("{} (E = {})", self.spec(), self.shared_exp),
            });
        }
        Ok(sign_magnitude::code(level as i32, self.n))
    }

    pub fn quantize_value(&self, x: f64) -> u16 {
        let l = f64::from(sign_magnitude::max_level(self.n));
        let level = round_half_away(x / self.step()).clamp(-l, l);
        sign_magnitude::code(level as i32, self.n)
    }
}

pub fn bfp_quantize(tensor: &TensorF32, n: u8) -> Result<QuantizedTensor> {
    bfp_quantize_with(tensor, n, Execution::default())
}

pub fn bfp_quantize_with(tensor: &TensorF32, n: u8, exec: Execution) -> Result<QuantizedTensor> {
    let params = BfpParams::fitted(n, tensor.max_abs())?;
    let codes = par::map(exec, tensor.data(), |&x| params.quantize_value(f64::from(x)));
    QuantizedTensor::new(
        tensor.name(),
        tensor.shape().to_vec(),
        QuantParams::BlockFloat(params),
        &codes,
    )
}
