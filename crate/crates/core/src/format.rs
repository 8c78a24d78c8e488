//! Format descriptors and code words.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported word width. Codebooks are enumerated exhaustively.
pub const MAX_BITS: u8 = 16;
pub const MIN_BITS: u8 = 3;
/// Exponent-field cap for the float-like kinds; keeps every codebook inside
/// the finite `f64` range and AdaptivFloat biases storable.
pub const MAX_FLOAT_EXP_BITS: u8 = 8;
/// `es` cap for posits (maxpos = 2^(2^es * (n-2)) must stay finite).
pub const MAX_POSIT_ES: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatKind {
    AdaptivFloat,
    #[serde(rename = "float")]
    IeeeLikeFloat,
    #[serde(rename = "bfp")]
    BlockFloat,
    Uniform,
    Posit,
}

impl FormatKind {
    pub const ALL: [FormatKind; 5] = [
        FormatKind::AdaptivFloat,
        FormatKind::IeeeLikeFloat,
        FormatKind::BlockFloat,
        FormatKind::Uniform,
        FormatKind::Posit,
    ];

    /// Container format code.
    pub fn code(self) -> u8 {
        match self {
            FormatKind::AdaptivFloat => 0,
            FormatKind::IeeeLikeFloat => 1,
            FormatKind::BlockFloat => 2,
            FormatKind::Uniform => 3,
            FormatKind::Posit => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            FormatKind::AdaptivFloat => "adaptivfloat",
            FormatKind::IeeeLikeFloat => "float",
            FormatKind::BlockFloat => "bfp",
            FormatKind::Uniform => "uniform",
            FormatKind::Posit => "posit",
        }
    }

    /// Whether the kind carries an exponent (or `es`) field width.
    pub fn has_exponent(self) -> bool {
        matches!(
            self,
            FormatKind::AdaptivFloat | FormatKind::IeeeLikeFloat | FormatKind::Posit
        )
    }

    /// Exponent widths the kind accepts at `n` bits.
    pub fn exponent_range(self, n: u8) -> std::ops::RangeInclusive<u8> {
        match self {
            FormatKind::AdaptivFloat | FormatKind::IeeeLikeFloat => 1..=(n.saturating_sub(1)).min(MAX_FLOAT_EXP_BITS),
            FormatKind::Posit => 0..=(n.saturating_sub(3)).min(MAX_POSIT_ES),
            FormatKind::BlockFloat | FormatKind::Uniform => 0..=0,
        }
    }

    /// Exponent widths that worked best in the original evaluation:
    /// 3 for AdaptivFloat, 4 for float (3 at 4 bits), 1 for posit (0 at 4 bits).
    pub fn default_exp_bits(self, n: u8) -> u8 {
        let preferred = match self {
            FormatKind::AdaptivFloat => 3,
            FormatKind::IeeeLikeFloat if n <= 4 => 3,
            FormatKind::IeeeLikeFloat => 4,
            FormatKind::Posit if n <= 4 => 0,
            FormatKind::Posit => 1,
            FormatKind::BlockFloat | FormatKind::Uniform => 0,
        };
        let range = self.exponent_range(n);
        preferred.clamp(*range.start(), *range.end())
    }
}

impl fmt::Display for FormatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FormatKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "adaptivfloat" | "afloat" | "af" => Ok(FormatKind::AdaptivFloat),
            "float" | "ieee" | "ieeelike" | "ieee-like" => Ok(FormatKind::IeeeLikeFloat),
            "bfp" | "blockfloat" | "block-float" => Ok(FormatKind::BlockFloat),
            "uniform" | "int" => Ok(FormatKind::Uniform),
            "posit" => Ok(FormatKind::Posit),
            other => Err(Error::config(format!("unknown format `{other}`"))),
        }
    }
}

/// A number format family and its bit allocation.
///
/// `e` is the exponent width for float-like kinds, `es` for posits and
/// always 0 for uniform and block floating-point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormatSpec {
    pub kind: FormatKind,
    pub n: u8,
    pub e: u8,
}

impl FormatSpec {
    pub fn new(kind: FormatKind, n: u8, e: u8) -> Result<Self> {
        let e = if kind.has_exponent() { e } else { 0 };
        let spec = FormatSpec { kind, n, e };
        spec.validate()?;
        Ok(spec)
    }

    pub fn adaptivfloat(n: u8, e: u8) -> Result<Self> {
        Self::new(FormatKind::AdaptivFloat, n, e)
    }

    pub fn validate(&self) -> Result<()> {
        if !(MIN_BITS..=MAX_BITS).contains(&self.n) {
            return Err(Error::config(format!(
                "{}: n = {} outside {MIN_BITS}..={MAX_BITS}",
                self.kind, self.n
            )));
        }
        let range = self.kind.exponent_range(self.n);
        if !range.contains(&self.e) {
            return Err(Error::config(format!(
                "{}<{},{}>: exponent width must be in {}..={}",
                self.kind,
                self.n,
                self.e,
                range.start(),
                range.end()
            )));
        }
        Ok(())
    }

    /// Mantissa fraction bits of float-like kinds (`n - e - 1`).
    pub fn mantissa_bits(&self) -> u8 {
        self.n - self.e - 1
    }

    pub fn code_count(&self) -> usize {
        1usize << self.n
    }
}

impl fmt::Display for FormatSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.kind.has_exponent() {
            write!(f, "{}<{},{}>", self.kind, self.n, self.e)
        } else {
            write!(f, "{}<{}>", self.kind, self.n)
        }
    }
}

/// An `width`-bit pattern. Bit `width-1` is the sign for sign-magnitude kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CodeWord {
    bits: u16,
    width: u8,
}

impl CodeWord {
    pub fn new(bits: u16, width: u8) -> Result<Self> {
        if !(1..=MAX_BITS).contains(&width) || u32::from(bits) >> width != 0 {
            return Err(Error::config(format!("code {bits:#x} does not fit in {width} bits")));
        }
        Ok(CodeWord { bits, width })
    }

    pub(crate) fn new_unchecked(bits: u16, width: u8) -> Self {
        debug_assert!(u32::from(bits) >> width == 0);
        CodeWord { bits, width }
    }

    pub fn bits(self) -> u16 {
        self.bits
    }

    pub fn width(self) -> u8 {
        self.width
    }

    pub fn sign(self) -> bool {
        self.bits >> (self.width - 1) & 1 == 1
    }

    /// Binary string, most significant bit first.
    pub fn to_bit_string(self) -> String {
        format!("{:0width$b}", self.bits, width = self.width as usize)
    }
}

impl fmt::Display for CodeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0b{}", self.to_bit_string())
    }
}
