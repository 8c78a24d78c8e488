use serde::Serialize;

use super::sign_magnitude;
use crate::bits::round_half_away;
use crate::codec::QuantParams;
use crate::error::{Error, Result};
use crate::format::{FormatKind, FormatSpec};
use crate::par::{self, Execution};
use crate::tensor::{QuantizedTensor, TensorF32};

/// Symmetric integer grid `{-L..L} * scale` with `L = 2^(n-1) - 1`.
/// Codes are sign-magnitude, so `-0` is a second zero code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformParams {
    n: u8,
    scale: f64,
}

impl UniformParams {
    pub fn new(n: u8, scale: f64) -> Result<Self> {
        FormatSpec::new(FormatKind::Uniform, n, 0)?;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::config(format!("uniform scale must be positive, got {scale}")));
        }
        Ok(UniformParams { n, scale })
    }

    /// `scale = max_abs / L`; a zero tensor records scale 1.
    pub fn fitted(n: u8, max_abs: f64) -> Result<Self> {
        let levels = f64::from(sign_magnitude::max_level(n.clamp(3, 16)));
        let scale = if max_abs > 0.0 { max_abs / levels } else { 1.0 };
        Self::new(n, scale)
    }

    pub fn spec(&self) -> FormatSpec {
        FormatSpec {
            kind: FormatKind::Uniform,
            n: self.n,
            e: 0,
        }
    }

    pub fn n(&self) -> u8 {
        self.n
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn max_level(&self) -> i32 {
        sign_magnitude::max_level(self.n)
    }

    /// Signed integer level of a code.
    pub fn level(&self, bits: u16) -> i32 {
        sign_magnitude::level(bits, self.n)
    }

    pub fn code_for_level(&self, level: i32) -> u16 {
        sign_magnitude::code(level.clamp(-self.max_level(), self.max_level()), self.n)
    }

    pub fn decode(&self, bits: u16) -> f64 {
        f64::from(self.level(bits)) * self.scale
    }

    pub fn encode(&self, x: f64) -> Result<u16> {
        let level = round_half_away(x / self.scale);
        if level.abs() > f64::from(self.max_level()) || f64::from(level as i32) * self.scale != x {
            return Err(Error::NotRepresentable {
                value: x,
                format: format!("{} (scale {})", self.spec(), self.scale),
            });
        }
        Ok(sign_magnitude::code(level as i32, self.n))
    }

    /// Nearest level, clamped to the symmetric range. Distances are
    /// measured to the decoded grid values, since `x / scale` itself rounds
    /// and can land on the wrong side of a midpoint.
    pub fn quantize_level(&self, x: f64) -> i32 {
        let l = self.max_level();
        let guess = round_half_away(x / self.scale).clamp(-f64::from(l), f64::from(l)) as i32;
        let dist = |k: i32| (x - f64::from(k) * self.scale).abs();
        let mut best = guess;
        for k in [guess - 1, guess + 1] {
            if k.abs() > l {
                continue;
            }
            let (db, dk) = (dist(best), dist(k));
            if dk < db || (dk == db && k.abs() > best.abs()) {
                best = k;
            }
        }
        best
    }

    pub fn quantize_value(&self, x: f64) -> u16 {
        sign_magnitude::code(self.quantize_level(x), self.n)
    }
}

pub fn uniform_quantize(tensor: &TensorF32, n: u8) -> Result<QuantizedTensor> {
    uniform_quantize_with(tensor, n, Execution::default())
}

pub fn uniform_quantize_with(tensor: &TensorF32, n: u8, exec: Execution) -> Result<QuantizedTensor> {
    let params = UniformParams::fitted(n, tensor.max_abs())?;
    let codes = par::map(exec, tensor.data(), |&x| params.quantize_value(f64::from(x)));
    QuantizedTensor::new(
        tensor.name(),
        tensor.shape().to_vec(),
        QuantParams::Uniform(params),
        &codes,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_level_rounds_away() {
        let t = TensorF32::new("w", vec![2], vec![1.0, 0.5]).unwrap();
        let q = uniform_quantize(&t, 4).unwrap();
        let QuantParams::Uniform(p) = q.params() else { panic!() };
        assert_eq!(p.scale(), 1.0 / 7.0);
        let levels: Vec<i32> = q.codes().iter().map(|&c| p.level(c)).collect();
        assert_eq!(levels, vec![7, 4]);
        let dq = q.dequantize().unwrap();
        assert_eq!(dq[0], 1.0);
        assert!((dq[1] - 4.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_three_bit() {
        let t = TensorF32::new("w", vec![2], vec![-1.0, 1.0]).unwrap();
        let q = uniform_quantize(&t, 3).unwrap();
        let QuantParams::Uniform(p) = q.params() else { panic!() };
        let levels: Vec<i32> = q.codes().iter().map(|&c| p.level(c)).collect();
        assert_eq!(levels, vec![-3, 3]);
        assert_eq!(q.dequantize().unwrap(), vec![-1.0, 1.0]);
    }

    #[test]
    fn near_midpoint_uses_grid_distance() {
        let p = UniformParams::new(4, 0.1).unwrap();
        // 0.15 in f64 sits just below the midpoint of 0.1 and 2 * 0.1
        let x = 0.15;
        let (d1, d2) = ((x - 0.1f64).abs(), (x - 2.0 * 0.1f64).abs());
        let want = if d2 <= d1 { 2 } else { 1 };
        assert_eq!(p.quantize_level(x), want);
        assert_eq!(p.quantize_level(-x), -want);
    }

    #[test]
    fn zero_tensor_scale_one() {
        let t = TensorF32::new("z", vec![3], vec![0.0; 3]).unwrap();
        let q = uniform_quantize(&t, 8).unwrap();
        let QuantParams::Uniform(p) = q.params() else { panic!() };
        assert_eq!(p.scale(), 1.0);
        assert!(q.codes().iter().all(|&c| c == 0));
    }

    #[test]
    fn encode_requires_grid_point() {
        let p = UniformParams::new(4, 0.25).unwrap();
        assert_eq!(p.level(p.encode(-1.75).unwrap()), -7);
        assert!(p.encode(0.3).is_err());
        assert!(p.encode(2.0).is_err());
        assert!(UniformParams::new(4, 0.0).is_err());
    }
}
