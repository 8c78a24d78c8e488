//! A bit-exact number-format lab built around AdaptivFloat.
//!
//! * [`adaptivfloat`]: decode, encode and per-tensor quantization with an
//!   exponent bias derived from the tensor's largest magnitude.
//! * [`baseline`]: uniform integer, block floating-point, IEEE-like float
//!   and posit codecs behind the same [`QuantParams`] / [`QuantizedTensor`]
//!   interface.
//! * [`codebook`]: exhaustive enumeration of any format up to 16 bits and
//!   the nearest-value search every codec is checked against.
//! * [`analyzer`]: per-layer RMS error sweeps, exponent-width search and
//!   activation bias calibration.
//! * [`pe`]: bit-accurate integer and hybrid float-integer processing
//!   element models plus a small GEMV / LSTM workload runner.
//! * [`io`]: tensor manifests, the `AQF1` quantized container and report
//!   writers.
//!
//! Elementwise quantization and sweeps run on rayon when the `parallel`
//! feature (on by default) is enabled; see [`par::Execution`].

pub mod adaptivfloat;
pub mod analyzer;
pub mod baseline;
pub mod bits;
pub mod codebook;
pub mod codec;
pub mod error;
pub mod format;
pub mod io;
pub mod packing;
pub mod par;
pub mod pe;
pub mod tensor;

pub use adaptivfloat::{derive_exp_bias, AdaptivFloatParams};
pub use codebook::{enumerate_codebook, nearest_value, Codebook};
pub use codec::{quantize, quantize_with, QuantParams};
pub use error::{Error, Result};
pub use format::{CodeWord, FormatKind, FormatSpec};
pub use par::Execution;
pub use tensor::{QuantizedTensor, TensorF32};
