//! LSB-first bit packing: code `i` occupies stream bits `[i*n, (i+1)*n)`,
//! the last byte is zero-padded in its high bits.

use crate::error::{Error, Result};
use crate::format::MAX_BITS;

/// Bytes needed for `count` codes of `width` bits.
pub fn packed_len(count: usize, width: u8) -> usize {
    (count * width as usize).div_ceil(8)
}

pub fn pack_codes(words: &[u16], width: u8) -> Result<Vec<u8>> {
    check_width(width)?;
    let mut out = vec![0u8; packed_len(words.len(), width)];
    let mut bit = 0usize;
    for (i, &w) in words.iter().enumerate() {
        if u32::from(w) >> width != 0 {
            return Err(Error::config(format!(
                "code #{i} ({w:#x}) does not fit in {width} bits"
            )));
        }
        let mut v = u32::from(w);
        let mut left = width as usize;
        while left > 0 {
            let byte = bit / 8;
            let off = bit % 8;
            let take = (8 - off).min(left);
            out[byte] |= ((v & ((1 << take) - 1)) as u8) << off;
            v >>= take;
            bit += take;
            left -= take;
        }
    }
    Ok(out)
}

pub fn unpack_codes(bytes: &[u8], width: u8, count: usize) -> Result<Vec<u16>> {
    check_width(width)?;
    let need = packed_len(count, width);
    if bytes.len() < need {
        return Err(Error::Format {
            offset: bytes.len(),
            reason: format!(
                "code stream truncated: {count} x {width}-bit codes need {need} bytes, got {}",
                bytes.len()
            ),
        });
    }
    let mut out = Vec::with_capacity(count);
    let mut bit = 0usize;
    for _ in 0..count {
        let mut v = 0u32;
        let mut got = 0usize;
        while got < width as usize {
            let byte = bit / 8;
            let off = bit % 8;
            let take = (8 - off).min(width as usize - got);
            let chunk = (u32::from(bytes[byte]) >> off) & ((1 << take) - 1);
            v |= chunk << got;
            got += take;
            bit += take;
        }
        out.push(v as u16);
    }
    Ok(out)
}

fn check_width(width: u8) -> Result<()> {
    if (1..=MAX_BITS).contains(&width) {
        Ok(())
    } else {
        Err(Error::config(format!("code width {width} outside 1..=16")))
    }
}

/// Codes packed at a fixed width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedCodes {
    width: u8,
    len: usize,
    bytes: Vec<u8>,
}

impl PackedCodes {
    pub fn pack(words: &[u16], width: u8) -> Result<Self> {
        Ok(PackedCodes {
            width,
            len: words.len(),
            bytes: pack_codes(words, width)?,
        })
    }

    /// Takes ownership of an already packed stream; the length must match
    /// exactly and the padding bits must be zero.
    pub fn from_bytes(bytes: Vec<u8>, width: u8, len: usize) -> Result<Self> {
        check_width(width)?;
        let need = packed_len(len, width);
        if bytes.len() != need {
            return Err(Error::Format {
                offset: bytes.len().min(need),
                reason: format!("payload is {} bytes, expected {need}", bytes.len()),
            });
        }
        let used = (len * width as usize) % 8;
        if let (Some(&last), true) = (bytes.last(), used != 0) {
            if last >> used != 0 {
                return Err(Error::Format {
                    offset: need - 1,
                    reason: "nonzero padding bits after the last code".into(),
                });
            }
        }
        Ok(PackedCodes { width, len, bytes })
    }

    pub fn width(&self) -> u8 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn unpack(&self) -> Vec<u16> {
        unpack_codes(&self.bytes, self.width, self.len).expect("length checked at construction")
    }
}
