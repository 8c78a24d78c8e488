//! Exhaustive codebooks: every code of a format decoded and sorted by
//! value. Used directly by the float and posit codecs and as the reference
//! every other codec is checked against.

use crate::codec::QuantParams;
use crate::error::{Error, Result};
use crate::format::{CodeWord, FormatSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub code: CodeWord,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct Codebook {
    params: QuantParams,
    entries: Vec<Entry>,
    /// First entry of each run of equal values (the canonical code).
    distinct: Vec<Entry>,
}

impl Codebook {
    /// Decodes all `2^n` codes (posit NaR excluded), keeping duplicate
    /// values as separate entries. Sorted by value, ties by code.
    pub fn enumerate(params: &QuantParams) -> Result<Self> {
        let spec = params.spec();
        spec.validate()?;
        let mut entries = Vec::with_capacity(spec.code_count());
        for bits in 0..spec.code_count() as u32 {
            let bits = bits as u16;
            match params.decode(bits) {
                // fold -0.0 into +0.0 so total_cmp groups the zero codes
                Ok(value) => entries.push(Entry {
                    code: CodeWord::new_unchecked(bits, spec.n),
                    value: value + 0.0,
                }),
                Err(Error::NotAReal { .. }) => continue,
                Err(other) => return Err(other),
            }
        }
        entries.sort_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then_with(|| a.code.bits().cmp(&b.code.bits()))
        });
        let mut distinct: Vec<Entry> = Vec::with_capacity(entries.len());
        for e in &entries {
            if distinct.last().is_none_or(|d| d.value != e.value) {
                distinct.push(*e);
            }
        }
        Ok(Codebook {
            params: *params,
            entries,
            distinct,
        })
    }

    pub fn params(&self) -> &QuantParams {
        &self.params
    }

    pub fn spec(&self) -> FormatSpec {
        self.params.spec()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// One entry per distinct value, carrying its lowest code.
    pub fn distinct(&self) -> &[Entry] {
        &self.distinct
    }

    pub fn distinct_values(&self) -> Vec<f64> {
        self.distinct.iter().map(|e| e.value).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Nearest entry to `x`; exact midpoints go to the larger magnitude.
    pub fn nearest(&self, x: f64) -> (CodeWord, f64) {
        let d = &self.distinct;
        let idx = d.partition_point(|e| e.value < x);
        let pick = if idx == 0 {
            d[0]
        } else if idx == d.len() {
            d[idx - 1]
        } else {
            let (lo, hi) = (d[idx - 1], d[idx]);
            let dl = x - lo.value;
            let dh = hi.value - x;
            let tie_to_hi = dl == dh && hi.value.abs() >= lo.value.abs();
            if dh < dl || tie_to_hi {
                hi
            } else {
                lo
            }
        };
        (pick.code, pick.value)
    }

    /// Canonical code of an exactly representable value.
    pub fn encode(&self, x: f64) -> Result<u16> {
        let d = &self.distinct;
        let idx = d.partition_point(|e| e.value < x);
        match d.get(idx) {
            Some(e) if e.value == x => Ok(e.code.bits()),
            _ => Err(Error::NotRepresentable {
                value: x,
                format: self.spec().to_string(),
            }),
        }
    }
}

/// Builds the codebook for `spec` with its per-tensor parameter:
/// the exponent bias (AdaptivFloat), shared exponent (block float) or
/// scale (uniform). Ignored by the fixed formats.
pub fn enumerate_codebook(spec: FormatSpec, bias_or_scale: f64) -> Result<Codebook> {
    Codebook::enumerate(&QuantParams::from_spec(spec, bias_or_scale)?)
}

/// Free-function form of [`Codebook::nearest`].
pub fn nearest_value(cb: &Codebook, x: f64) -> (CodeWord, f64) {
    cb.nearest(x)
}
