use serde::{Deserialize, Serialize};

use crate::codec::QuantParams;
use crate::error::{Error, Result};
use crate::packing::PackedCodes;

/// A named row-major `f32` tensor. Construction rejects NaN and infinities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorF32 {
    name: String,
    shape: Vec<usize>,
    data: Vec<f32>,
}

impl TensorF32 {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let name = name.into();
        let invalid = |reason: String| Error::InvalidTensor {
            name: name.clone(),
            reason,
        };
        if shape.contains(&0) {
            return Err(invalid(format!("shape {shape:?} has a zero dimension")));
        }
        let count: usize = shape.iter().product();
        if count != data.len() {
            return Err(invalid(format!(
                "shape {shape:?} holds {count} elements but {} were given",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(invalid(format!("non-finite value {} at index {i}", data[i])));
        }
        Ok(TensorF32 { name, shape, data })
    }

    /// A rank-1 tensor.
    pub fn vector(name: impl Into<String>, data: Vec<f32>) -> Result<Self> {
        let len = data.len();
        Self::new(name, vec![len], data)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0f64, |m, &x| m.max(f64::from(x).abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().fold(f64::INFINITY, |m, &x| m.min(f64::from(x)))
    }

    pub fn max(&self) -> f64 {
        self.data.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(f64::from(x)))
    }

    /// Every element multiplied by `factor`.
    pub fn scaled(&self, factor: f32) -> Result<Self> {
        Self::new(
            self.name.clone(),
            self.shape.clone(),
            self.data.iter().map(|x| x * factor).collect(),
        )
    }
}

/// Packed code words with the parameters that decode them.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedTensor {
    name: String,
    shape: Vec<usize>,
    params: QuantParams,
    codes: PackedCodes,
}

impl QuantizedTensor {
    pub fn new(name: impl Into<String>, shape: Vec<usize>, params: QuantParams, codes: &[u16]) -> Result<Self> {
        let packed = PackedCodes::pack(codes, params.spec().n)?;
        Self::from_packed(name, shape, params, packed)
    }

    pub fn from_packed(
        name: impl Into<String>,
        shape: Vec<usize>,
        params: QuantParams,
        codes: PackedCodes,
    ) -> Result<Self> {
        let name = name.into();
        let count: usize = shape.iter().product();
        if count != codes.len() || codes.width() != params.spec().n {
            return Err(Error::InvalidTensor {
                name,
                reason: format!(
                    "{} codes of width {} do not match shape {shape:?} / {}",
                    codes.len(),
                    codes.width(),
                    params.spec()
                ),
            });
        }
        Ok(QuantizedTensor {
            name,
            shape,
            params,
            codes,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn params(&self) -> &QuantParams {
        &self.params
    }

    pub fn packed(&self) -> &PackedCodes {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> Vec<u16> {
        self.codes.unpack()
    }

    /// Decoded values. Fails only on posit NaR codes read from external data.
    pub fn dequantize(&self) -> Result<Vec<f64>> {
        self.codes().into_iter().map(|c| self.params.decode(c)).collect()
    }

    /// Re-encodes the dequantized values under the same parameters; equal to
    /// [`codes`](Self::codes) up to the canonical zero code.
    pub fn reencode(&self) -> Result<Vec<u16>> {
        self.dequantize()?.into_iter().map(|v| self.params.encode(v)).collect()
    }
}
