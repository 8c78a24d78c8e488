//! Format-independent dispatch over the five codecs.

use serde::Serialize;

use crate::adaptivfloat::{self, AdaptivFloatParams};
use crate::baseline::{bfp, ieee, posit, uniform, BfpParams, IeeeLikeParams, PositParams, UniformParams};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::format::{FormatKind, FormatSpec};
use crate::par::Execution;
use crate::tensor::{QuantizedTensor, TensorF32};

/// Everything needed to decode a code word: the format plus its per-tensor
/// bias, shared exponent or scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "format", rename_all = "lowercase")]
pub enum QuantParams {
    AdaptivFloat(AdaptivFloatParams),
    #[serde(rename = "float")]
    IeeeLike(IeeeLikeParams),
    #[serde(rename = "bfp")]
    BlockFloat(BfpParams),
    Uniform(UniformParams),
    Posit(PositParams),
}

impl QuantParams {
    /// `bias_or_scale` is the exponent bias (AdaptivFloat), the shared
    /// exponent (block float) or the scale (uniform).
    pub fn from_spec(spec: FormatSpec, bias_or_scale: f64) -> Result<Self> {
        spec.validate()?;
        let as_int = || -> Result<i32> {
            if bias_or_scale.fract() != 0.0 || bias_or_scale.abs() > 1e6 {
                return Err(Error::config(format!(
                    "{spec}: bias must be an integer, got {bias_or_scale}"
                )));
            }
            Ok(bias_or_scale as i32)
        };
        Ok(match spec.kind {
            FormatKind::AdaptivFloat => QuantParams::AdaptivFloat(AdaptivFloatParams::new(spec.n, spec.e, as_int()?)?),
            FormatKind::IeeeLikeFloat => QuantParams::IeeeLike(IeeeLikeParams::new(spec.n, spec.e)?),
            FormatKind::BlockFloat => QuantParams::BlockFloat(BfpParams::new(spec.n, as_int()?)?),
            FormatKind::Uniform => QuantParams::Uniform(UniformParams::new(spec.n, bias_or_scale)?),
            FormatKind::Posit => QuantParams::Posit(PositParams::new(spec.n, spec.e)?),
        })
    }

    pub fn spec(&self) -> FormatSpec {
        match self {
            QuantParams::AdaptivFloat(p) => p.spec(),
            QuantParams::IeeeLike(p) => p.spec(),
            QuantParams::BlockFloat(p) => p.spec(),
            QuantParams::Uniform(p) => p.spec(),
            QuantParams::Posit(p) => p.spec(),
        }
    }

    pub fn kind(&self) -> FormatKind {
        self.spec().kind
    }

    pub fn decode(&self, bits: u16) -> Result<f64> {
        Ok(match self {
            QuantParams::AdaptivFloat(p) => p.decode(bits),
            QuantParams::IeeeLike(p) => p.decode(bits),
            QuantParams::BlockFloat(p) => p.decode(bits),
            QuantParams::Uniform(p) => p.decode(bits),
            QuantParams::Posit(p) => return p.decode(bits),
        })
    }

    /// Code of an exactly representable value.
    pub fn encode(&self, x: f64) -> Result<u16> {
        match self {
            QuantParams::AdaptivFloat(p) => p.encode(x),
            QuantParams::IeeeLike(p) => p.encode(x),
            QuantParams::BlockFloat(p) => p.encode(x),
            QuantParams::Uniform(p) => p.encode(x),
            QuantParams::Posit(p) => p.encode(x),
        }
    }

    pub fn codebook(&self) -> Result<Codebook> {
        Codebook::enumerate(self)
    }

    /// Integer header field: AdaptivFloat bias, block-float shared
    /// exponent, 0 otherwise.
    pub fn bias_field(&self) -> i32 {
        match self {
            QuantParams::AdaptivFloat(p) => p.exp_bias(),
            QuantParams::BlockFloat(p) => p.shared_exp(),
            _ => 0,
        }
    }

    /// The per-tensor value reported in analysis tables.
    pub fn bias_or_scale(&self) -> f64 {
        match self {
            QuantParams::AdaptivFloat(p) => f64::from(p.exp_bias()),
            QuantParams::IeeeLike(p) => f64::from(p.bias()),
            QuantParams::BlockFloat(p) => f64::from(p.shared_exp()),
            QuantParams::Uniform(p) => p.scale(),
            QuantParams::Posit(_) => 0.0,
        }
    }
}

/// Quantizes a tensor with the format's own parameter fitting.
pub fn quantize(tensor: &TensorF32, spec: FormatSpec) -> Result<QuantizedTensor> {
    quantize_with(tensor, spec, Execution::default())
}

pub fn quantize_with(tensor: &TensorF32, spec: FormatSpec, exec: Execution) -> Result<QuantizedTensor> {
    spec.validate()?;
    let (n, e) = (spec.n, spec.e);
    match spec.kind {
        FormatKind::AdaptivFloat => adaptivfloat::quantize_tensor_with(tensor, n, e, exec),
        FormatKind::IeeeLikeFloat => ieee::float_quantize_with(tensor, n, e, exec),
        FormatKind::BlockFloat => bfp::bfp_quantize_with(tensor, n, exec),
        FormatKind::Uniform => uniform::uniform_quantize_with(tensor, n, exec),
        FormatKind::Posit => posit::posit_quantize_with(tensor, n, e, exec),
    }
}
