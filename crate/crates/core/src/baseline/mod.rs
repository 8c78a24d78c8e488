//! Comparison formats: symmetric uniform integer, whole-tensor block
//! floating-point, IEEE-like float and posit.

pub mod bfp;
pub mod ieee;
pub mod posit;
pub mod uniform;

pub use bfp::{bfp_quantize, BfpParams};
pub use ieee::{float_quantize, IeeeLikeParams};
pub use posit::{posit_decode, posit_quantize, PositParams};
pub use uniform::{uniform_quantize, UniformParams};

/// Sign-magnitude integer code helpers shared by uniform and BFP.
pub(crate) mod sign_magnitude {
    pub fn max_level(n: u8) -> i32 {
        (1 << (n - 1)) - 1
    }

    pub fn level(bits: u16, n: u8) -> i32 {
        let mag = i32::from(bits & ((1 << (n - 1)) - 1));
        if bits >> (n - 1) & 1 == 1 {
            -mag
        } else {
            mag
        }
    }

    /// `level` must satisfy `|level| <= max_level(n)`; zero encodes as `+0`.
    pub fn code(level: i32, n: u8) -> u16 {
        debug_assert!(level.abs() <= max_level(n));
        let mag = level.unsigned_abs() as u16;
        if level < 0 {
            1 << (n - 1) | mag
        } else {
            mag
        }
    }
}
