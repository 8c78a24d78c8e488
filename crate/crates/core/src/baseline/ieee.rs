use serde::Serialize;

use crate::bits::pow2;
use crate::codebook::Codebook;
use crate::codec::QuantParams;
use crate::error::{Error, Result};
use crate::format::{FormatKind, FormatSpec};
use crate::par::{self, Execution};
use crate::tensor::{QuantizedTensor, TensorF32};

/// IEEE-style float with fixed bias `2^(e-1) - 1` and denormals. The
/// all-ones exponent is an ordinary binade (no Inf/NaN codes) and
/// quantization saturates at the largest finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct IeeeLikeParams {
    n: u8,
    e: u8,
}

impl IeeeLikeParams {
    pub fn new(n: u8, e: u8) -> Result<Self> {
        FormatSpec::new(FormatKind::IeeeLikeFloat, n, e)?;
        Ok(IeeeLikeParams { n, e })
    }

    pub fn spec(&self) -> FormatSpec {
        FormatSpec {
            kind: FormatKind::IeeeLikeFloat,
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

    pub fn bias(&self) -> i32 {
        (1 << (self.e - 1)) - 1
    }

    pub fn max_finite(&self) -> f64 {
        let m = i32::from(self.m());
        pow2((1 << self.e) - 1 - self.bias()) * (2.0 - pow2(-m))
    }

    pub fn min_denormal(&self) -> f64 {
        pow2(1 - self.bias() - i32::from(self.m()))
    }

    pub fn decode(&self, bits: u16) -> f64 {
        let m = i32::from(self.m());
        let low = bits & ((1 << (self.n - 1)) - 1);
        let exp_field = i32::from(low >> m);
        let mant = f64::from(low & ((1 << m) - 1));
        let mag = if exp_field == 0 {
            pow2(1 - self.bias() - m) * mant
        } else {
            pow2(exp_field - self.bias() - m) * (pow2(m) + mant)
        };
        if bits >> (self.n - 1) & 1 == 1 {
            -mag
        } else {
            mag
        }
    }

    pub fn encode(&self, x: f64) -> Result<u16> {
        self.codebook().encode(x).map_err(|_| Error::NotRepresentable {
            value: x,
            format: self.spec().to_string(),
        })
    }

    pub fn codebook(&self) -> Codebook {
        Codebook::enumerate(&QuantParams::IeeeLike(*self)).expect("validated parameters")
    }
}

/// Nearest representable value over the enumerated codebook, saturating.
pub fn float_quantize(tensor: &TensorF32, n: u8, e: u8) -> Result<QuantizedTensor> {
    float_quantize_with(tensor, n, e, Execution::default())
}

pub fn float_quantize_with(tensor: &TensorF32, n: u8, e: u8, exec: Execution) -> Result<QuantizedTensor> {
    let params = IeeeLikeParams::new(n, e)?;
    let cb = params.codebook();
    let codes = par::map(exec, tensor.data(), |&x| cb.nearest(f64::from(x)).0.bits());
    QuantizedTensor::new(
        tensor.name(),
        tensor.shape().to_vec(),
        QuantParams::IeeeLike(params),
        &codes,
    )
}
