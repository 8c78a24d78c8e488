//! AdaptivFloat: sign / exponent / mantissa words whose exponent range is
//! shifted per tensor by an integer `exp_bias`. There are no denormals; the
//! two codes with all-zero exponent and mantissa fields both mean zero.

use serde::Serialize;

use crate::bits::{floor_log2, pow2, round_half_away};
use crate::codec::QuantParams;
use crate::error::{Error, Result};
use crate::format::{FormatKind, FormatSpec};
use crate::par::{self, Execution};
use crate::tensor::{QuantizedTensor, TensorF32};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct AdaptivFloatParams {
    n: u8,
    e: u8,
    exp_bias: i32,
}

impl AdaptivFloatParams {
    pub fn new(n: u8, e: u8, exp_bias: i32) -> Result<Self> {
        FormatSpec::adaptivfloat(n, e)?;
        Ok(AdaptivFloatParams { n, e, exp_bias })
    }

    /// Parameters whose top binade holds `max_abs`. A zero maximum falls
    /// back to [`default_exp_bias`].
    pub fn fitted(n: u8, e: u8, max_abs: f64) -> Result<Self> {
        let bias = derive_exp_bias(max_abs, e).unwrap_or_else(|| default_exp_bias(e));
        Self::new(n, e, bias)
    }

    pub fn spec(&self) -> FormatSpec {
        FormatSpec {
            kind: FormatKind::AdaptivFloat,
            n: self.n,
            e: self.e,
        }
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

    pub fn exp_bias(&self) -> i32 {
        self.exp_bias
    }

    fn max_exp_field(&self) -> i32 {
        (1 << self.e) - 1
    }

    pub fn exp_max(&self) -> i32 {
        self.exp_bias + self.max_exp_field()
    }

    /// Smallest nonzero magnitude, `2^bias * (1 + 2^-m)`.
    pub fn value_min(&self) -> f64 {
        pow2(self.exp_bias) * (1.0 + pow2(-i32::from(self.m())))
    }

    /// Largest magnitude, `2^exp_max * (2 - 2^-m)`.
    pub fn value_max(&self) -> f64 {
        pow2(self.exp_max()) * (2.0 - pow2(-i32::from(self.m())))
    }

    /// Same format, bias moved by `k` (the grid scaled by `2^k`).
    pub fn shifted(&self, k: i32) -> Self {
        AdaptivFloatParams {
            exp_bias: self.exp_bias + k,
            ..*self
        }
    }

    fn sign_bit(&self) -> u16 {
        1 << (self.n - 1)
    }

    /// Splits a code into `(negative, exp_field, mant_field)`.
    pub fn fields(&self, bits: u16) -> (bool, u16, u16) {
        let m = self.m();
        let low = bits & (self.sign_bit() - 1);
        (bits & self.sign_bit() != 0, low >> m, low & ((1 << m) - 1))
    }

    pub fn is_zero_code(&self, bits: u16) -> bool {
        bits & (self.sign_bit() - 1) == 0
    }

    /// Bit vector to value.
    pub fn decode(&self, bits: u16) -> f64 {
        if self.is_zero_code(bits) {
            return 0.0;
        }
        let m = i32::from(self.m());
        let (neg, exp_field, mant_field) = self.fields(bits);
        let mag = pow2(i32::from(exp_field) + self.exp_bias - m) * f64::from((1u32 << m) + u32::from(mant_field));
        if neg {
            -mag
        } else {
            mag
        }
    }

    /// Exact inverse of [`decode`](Self::decode); zero encodes as `+0`.
    pub fn encode(&self, x: f64) -> Result<u16> {
        if x == 0.0 {
            return Ok(0);
        }
        let not_repr = || Error::NotRepresentable {
            value: x,
            format: format!("{} (bias {})", self.spec(), self.exp_bias),
        };
        if !x.is_finite() {
            return Err(not_repr());
        }
        let m = i32::from(self.m());
        let a = x.abs();
        let exp = floor_log2(a);
        let scaled = a * pow2(m - exp);
        if scaled.fract() != 0.0 {
            return Err(not_repr());
        }
        let exp_field = exp - self.exp_bias;
        let mant_field = scaled as u32 - (1 << m);
        if !(0..=self.max_exp_field()).contains(&exp_field) || (exp_field == 0 && mant_field == 0) {
            return Err(not_repr());
        }
        Ok(self.pack_fields(x < 0.0, exp_field as u16, mant_field as u16))
    }

    fn pack_fields(&self, neg: bool, exp_field: u16, mant_field: u16) -> u16 {
        let sign = if neg { self.sign_bit() } else { 0 };
        sign | exp_field << self.m() | mant_field
    }

    /// Rounds `x` onto this grid: below-range magnitudes go to 0 or
    /// `value_min` split at `value_min / 2`, over-range magnitudes clamp to
    /// `value_max`, the rest round the mantissa on the `2^-m` grid. Every
    /// rounding is half away from zero.
    pub fn quantize_value(&self, x: f64) -> u16 {
        match self.decompose(x) {
            None => 0,
            Some(d) => self.pack_fields(
                d.negative,
                (d.exp - self.exp_bias) as u16,
                (d.mant_q - (1 << self.m())) as u16,
            ),
        }
    }

    fn decompose(&self, x: f64) -> Option<Decomposed> {
        let m = i32::from(self.m());
        let negative = x < 0.0;
        let mut a = x.abs();
        let value_min = self.value_min();
        let value_max = self.value_max();
        if a < value_min {
            if a < value_min / 2.0 {
                return None;
            }
            a = value_min;
        } else if a > value_max {
            a = value_max;
        }
        let mut exp = floor_log2(a);
        let mut mant_q = round_half_away(a * pow2(m - exp)) as u32;
        if mant_q == 1 << (m + 1) {
            exp += 1;
            mant_q = 1 << m;
        }
        if exp > self.exp_max() {
            exp = self.exp_max();
            mant_q = (1 << (m + 1)) - 1;
        }
        Some(Decomposed { negative, exp, mant_q })
    }
}

/// One element of the sign / exponent / quantized-mantissa split of a
/// tensor. `mant_q` is the mantissa scaled by `2^m`, in `[2^m, 2^(m+1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Decomposed {
    negative: bool,
    exp: i32,
    mant_q: u32,
}

/// `exp_max - (2^e - 1)` where `2^exp_max <= max_abs < 2^(exp_max+1)`.
/// `None` when `max_abs` is zero (or not a positive finite number).
pub fn derive_exp_bias(max_abs: f64, e: u8) -> Option<i32> {
    if !(max_abs.is_finite() && max_abs > 0.0) {
        return None;
    }
    Some(floor_log2(max_abs) - ((1i32 << e) - 1))
}

/// Bias recorded for an all-zero tensor: `-(2^e - 1)`, i.e. `exp_max = 0`.
pub fn default_exp_bias(e: u8) -> i32 {
    -((1i32 << e) - 1)
}

pub fn quantize_tensor(tensor: &TensorF32, n: u8, e: u8) -> Result<QuantizedTensor> {
    quantize_tensor_with(tensor, n, e, Execution::default())
}

pub fn quantize_tensor_with(tensor: &TensorF32, n: u8, e: u8, exec: Execution) -> Result<QuantizedTensor> {
    let params = AdaptivFloatParams::fitted(n, e, tensor.max_abs())?;
    let codes = par::map(exec, tensor.data(), |&x| params.quantize_value(f64::from(x)));
    QuantizedTensor::new(
        tensor.name(),
        tensor.shape().to_vec(),
        QuantParams::AdaptivFloat(params),
        &codes,
    )
}
