//! `AQF1` container: a self-describing little-endian header followed by the
//! packed code payload.
//!
//! ```text
//! magic "AQF1" | version u8 | format u8 | n u8 | e u8 | bias i8 | scale f32
//! | rank u8 | dims u32 x rank | payload
//! ```

use std::path::Path;

use crate::codec::QuantParams;
use crate::error::{Error, Result};
use crate::format::{FormatKind, FormatSpec};
use crate::packing::{packed_len, PackedCodes};
use crate::tensor::QuantizedTensor;

pub const MAGIC: &[u8; 4] = b"AQF1";
pub const VERSION: u8 = 1;

const FIXED_HEADER: usize = 4 + 1 + 1 + 1 + 1 + 1 + 4 + 1;

pub fn encode_container(q: &QuantizedTensor) -> Result<Vec<u8>> {
    let params = q.params();
    let spec = params.spec();
    let bias = i8::try_from(params.bias_field()).map_err(|_| {
        Error::config(format!(
            "{}: bias {} does not fit the i8 header field",
            q.name(),
            params.bias_field()
        ))
    })?;
    let scale = match params {
        QuantParams::Uniform(p) => {
            let s = p.scale() as f32;
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::config(format!(
                    "{}: scale {} is not a positive f32",
                    q.name(),
                    p.scale()
                )));
            }
            s
        }
        _ => 0.0,
    };
    let rank = u8::try_from(q.shape().len())
        .map_err(|_| Error::config(format!("{}: rank {} exceeds 255", q.name(), q.shape().len())))?;
    let mut out = Vec::with_capacity(FIXED_HEADER + 4 * q.shape().len() + q.packed().as_bytes().len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(spec.kind.code());
    out.push(spec.n);
    out.push(spec.e);
    out.push(bias as u8);
    out.extend_from_slice(&scale.to_le_bytes());
    out.push(rank);
    for &d in q.shape() {
        let d = u32::try_from(d).map_err(|_| Error::config(format!("{}: dimension {d} exceeds u32", q.name())))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    out.extend_from_slice(q.packed().as_bytes());
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Format {
                offset: self.bytes.len(),
                reason: format!("truncated header: missing {what}"),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn fail<T>(&self, at: usize, reason: impl Into<String>) -> Result<T> {
        Err(Error::Format {
            offset: at,
            reason: reason.into(),
        })
    }
}

/// Parses a container; `name` labels the resulting tensor.
pub fn decode_container(name: &str, bytes: &[u8]) -> Result<QuantizedTensor> {
    let mut c = Cursor { bytes, pos: 0 };
    if c.take(4, "magic")? != MAGIC {
        return c.fail(0, "bad magic, not an AQF1 container");
    }
    let version = c.u8("version")?;
    if version != VERSION {
        return c.fail(4, format!("unsupported version {version}"));
    }
    let code = c.u8("format code")?;
    let kind = FormatKind::from_code(code).map_or_else(|| c.fail(5, format!("unknown format code {code}")), Ok)?;
    let n = c.u8("n")?;
    let e = c.u8("exponent width")?;
    let spec = FormatSpec::new(kind, n, e).or_else(|err| c.fail(6, err.to_string()))?;
    if spec.e != e {
        return c.fail(7, format!("{kind} carries no exponent width, header has {e}"));
    }
    let bias = c.u8("bias")? as i8;
    let scale = f32::from_le_bytes(c.take(4, "scale")?.try_into().expect("4 bytes"));
    let has_bias = matches!(kind, FormatKind::AdaptivFloat | FormatKind::BlockFloat);
    if !has_bias && bias != 0 {
        return c.fail(8, format!("{kind} header must have bias 0, found {bias}"));
    }
    let bias_or_scale = if kind == FormatKind::Uniform {
        if !(scale.is_finite() && scale > 0.0) {
            return c.fail(9, format!("uniform scale {scale} must be positive and finite"));
        }
        f64::from(scale)
    } else {
        if scale.to_bits() != 0 {
            return c.fail(9, format!("{kind} header must have scale 0, found {scale}"));
        }
        f64::from(bias)
    };
    let params = QuantParams::from_spec(spec, bias_or_scale).or_else(|err| c.fail(8, err.to_string()))?;
    let rank = c.u8("rank")? as usize;
    if rank == 0 {
        return c.fail(FIXED_HEADER - 1, "rank must be at least 1");
    }
    let mut shape = Vec::with_capacity(rank);
    let mut count: usize = 1;
    for i in 0..rank {
        let d = u32::from_le_bytes(c.take(4, "dimension")?.try_into().expect("4 bytes")) as usize;
        count = count
            .checked_mul(d)
            .map_or_else(|| c.fail(FIXED_HEADER + 4 * i, "element count overflows"), Ok)?;
        shape.push(d);
    }
    let payload = &bytes[c.pos..];
    let need = packed_len(count, n);
    if payload.len() != need {
        return c.fail(
            c.pos + payload.len().min(need),
            format!(
                "payload is {} bytes, {count} x {n}-bit codes need {need}",
                payload.len()
            ),
        );
    }
    let packed = PackedCodes::from_bytes(payload.to_vec(), n, count).map_err(|err| match err {
        Error::Format { offset, reason } => Error::Format {
            offset: c.pos + offset,
            reason,
        },
        other => other,
    })?;
    QuantizedTensor::from_packed(name, shape, params, packed)
}

pub fn write_container(path: &Path, q: &QuantizedTensor) -> Result<()> {
    let bytes = encode_container(q)?;
    super::write_atomic(path, &bytes)
}

/// Reads a container, naming the tensor after the file stem.
pub fn read_container(path: &Path) -> Result<QuantizedTensor> {
    let bytes = super::read_bytes(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    decode_container(&name, &bytes).map_err(|e| e.in_layer(&path.display().to_string()))
}
