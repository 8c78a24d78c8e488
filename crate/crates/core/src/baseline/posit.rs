//! Posits: sign, run-length regime, `es` exponent bits, fraction.
//! Negative words are decoded through their two's complement.

use serde::Serialize;

use crate::bits::pow2;
use crate::codebook::Codebook;
use crate::codec::QuantParams;
use crate::error::{Error, Result};
use crate::format::{FormatKind, FormatSpec};
use crate::par::{self, Execution};
use crate::tensor::{QuantizedTensor, TensorF32};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PositParams {
    n: u8,
    es: u8,
}

impl PositParams {
    pub fn new(n: u8, es: u8) -> Result<Self> {
        FormatSpec::new(FormatKind::Posit, n, es)?;
        Ok(PositParams { n, es })
    }

    pub fn spec(&self) -> FormatSpec {
        FormatSpec {
            kind: FormatKind::Posit,
            n: self.n,
            e: self.es,
        }
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn es(&self) -> u8 {
        self.es
    }

    /// `log2(useed) = 2^es`.
    fn useed_log2(&self) -> i32 {
        1 << self.es
    }

    pub fn useed(&self) -> f64 {
        pow2(self.useed_log2())
    }

    pub fn maxpos(&self) -> f64 {
        pow2(self.useed_log2() * (i32::from(self.n) - 2))
    }

    pub fn minpos(&self) -> f64 {
        1.0 / self.maxpos()
    }

    pub fn nar(&self) -> u16 {
        1 << (self.n - 1)
    }

    pub fn decode(&self, bits: u16) -> Result<f64> {
        posit_decode(bits, self.n, self.es)
    }

    pub fn encode(&self, x: f64) -> Result<u16> {
        self.codebook().encode(x).map_err(|_| Error::NotRepresentable {
            value: x,
            format: self.spec().to_string(),
        })
    }

    pub fn codebook(&self) -> Codebook {
        Codebook::enumerate(&QuantParams::Posit(*self)).expect("validated parameters")
    }

    /// Two's-complement reading of a code, the order posits sort by.
    pub fn as_signed(&self, bits: u16) -> i32 {
        let shift = 32 - u32::from(self.n);
        ((u32::from(bits) << shift) as i32) >> shift
    }
}

/// Decodes an `n`-bit posit with `es` exponent bits. NaR (sign bit alone)
/// is reported as [`Error::NotAReal`].
pub fn posit_decode(bits: u16, n: u8, es: u8) -> Result<f64> {
    let mask = ((1u32 << n) - 1) as u16;
    let bits = bits & mask;
    let sign_bit = 1u16 << (n - 1);
    if bits == 0 {
        return Ok(0.0);
    }
    if bits == sign_bit {
        return Err(Error::NotAReal { code: bits });
    }
    let negative = bits & sign_bit != 0;
    let body = if negative { bits.wrapping_neg() & mask } else { bits };

    // walk the n-1 bits after the sign, MSB first
    let rest = u32::from(n) - 1;
    let bit_at = |i: u32| (body >> (rest - 1 - i)) & 1;
    let first = bit_at(0);
    let mut run = 1;
    while run < rest && bit_at(run) == first {
        run += 1;
    }
    let k = if first == 1 { run as i32 - 1 } else { -(run as i32) };
    // skip the terminating bit when present
    let mut pos = (run + 1).min(rest);

    let mut exp = 0i32;
    for _ in 0..es {
        exp <<= 1;
        if pos < rest {
            exp |= i32::from(bit_at(pos));
            pos += 1;
        }
    }
    let frac_bits = rest - pos;
    let frac = u32::from(body) & ((1u32 << frac_bits) - 1);
    let scale = k * (1 << es) + exp;
    let mag = pow2(scale - frac_bits as i32) * f64::from((1u32 << frac_bits) + frac);
    Ok(if negative { -mag } else { mag })
}

/// Nearest posit over the enumerated codebook; NaR is never produced and
/// out-of-range magnitudes clamp to `±maxpos`.
pub fn posit_quantize(tensor: &TensorF32, n: u8, es: u8) -> Result<QuantizedTensor> {
    posit_quantize_with(tensor, n, es, Execution::default())
}

pub fn posit_quantize_with(tensor: &TensorF32, n: u8, es: u8, exec: Execution) -> Result<QuantizedTensor> {
    let params = PositParams::new(n, es)?;
    let cb = params.codebook();
    let codes = par::map(exec, tensor.data(), |&x| cb.nearest(f64::from(x)).0.bits());
    QuantizedTensor::new(
        tensor.name(),
        tensor.shape().to_vec(),
        QuantParams::Posit(params),
        &codes,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn posit4_es0_values() {
        assert_eq!(posit_decode(0b0111, 4, 0).unwrap(), 4.0);
        assert_eq!(posit_decode(0b0100, 4, 0).unwrap(), 1.0);
        let positives: Vec<f64> = (1..8u16).map(|c| posit_decode(c, 4, 0).unwrap()).collect();
        assert_eq!(positives, vec![0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 4.0]);
        assert_eq!(posit_decode(0b1100, 4, 0).unwrap(), -1.0);
        assert_eq!(posit_decode(0b1001, 4, 0).unwrap(), -4.0);
    }

    #[test]
    fn nar_is_signalled() {
        assert!(matches!(posit_decode(0b1000, 4, 0), Err(Error::NotAReal { code: 8 })));
    }

    #[test]
    fn identity_point() {
        for n in 3..=16u8 {
            for es in 0..=(n - 3).min(4) {
                assert_eq!(posit_decode(1 << (n - 2), n, es).unwrap(), 1.0, "n={n} es={es}");
                let p = PositParams::new(n, es).unwrap();
                assert_eq!(posit_decode((1 << (n - 1)) - 1, n, es).unwrap(), p.maxpos());
                assert_eq!(posit_decode(1, n, es).unwrap(), p.minpos());
            }
        }
    }

    #[test]
    fn posit8_es1_spot_values() {
        // body 1011000: regime "10" (k=0), exponent 1, fraction 1000 -> 2 * 1.5
        assert_eq!(posit_decode(0b0101_1000, 8, 1).unwrap(), 3.0);
        // body 0100000: regime "01" (k=-1, useed 4), exponent 0
        assert_eq!(posit_decode(0b0010_0000, 8, 1).unwrap(), 0.25);
    }

    #[test]
    fn nearest_posit4() {
        let t = TensorF32::new("w", vec![1], vec![0.6]).unwrap();
        let q = posit_quantize(&t, 4, 0).unwrap();
        assert_eq!(q.dequantize().unwrap(), vec![0.5]);
        let t = TensorF32::new("w", vec![2], vec![100.0, -1e-6]).unwrap();
        let q = posit_quantize(&t, 4, 0).unwrap();
        assert_eq!(q.dequantize().unwrap(), vec![4.0, 0.0]);
    }
}
