//! Exact binary helpers shared by the codecs.

/// `2^k` as an exact `f64` (falls back to `powi` outside the normal range).
#[inline]
pub fn pow2(k: i32) -> f64 {
    if (-1022..=1023).contains(&k) {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        2f64.powi(k)
    }
}

/// `floor(log2(x))` for finite `x > 0`, read from the exponent field so
/// exact powers of two never land in the wrong binade.
#[inline]
pub fn floor_log2(x: f64) -> i32 {
    debug_assert!(x.is_finite() && x > 0.0);
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i32;
    if biased == 0 {
        // subnormal: position of the leading one in the fraction
        let frac = bits & ((1u64 << 52) - 1);
        let lead = 63 - frac.leading_zeros() as i32;
        lead - 1074
    } else {
        biased - 1023
    }
}

/// Round to nearest integer, ties away from zero.
#[inline]
pub fn round_half_away(x: f64) -> f64 {
    x.round()
}

/// Bits needed to hold `v` as a two's-complement integer.
pub fn signed_bits(v: i128) -> u32 {
    if v >= 0 {
        129 - v.leading_zeros()
    } else {
        129 - (!v).leading_zeros()
    }
}

/// True when `v` fits a `width`-bit two's-complement register.
#[inline]
pub fn fits_signed(v: i128, width: u32) -> bool {
    width > 0 && signed_bits(v) <= width
}

/// `ceil(log2(h))` for `h >= 1`.
pub fn ceil_log2(h: u64) -> u32 {
    if h <= 1 {
        0
    } else {
        64 - (h - 1).leading_zeros()
    }
}

/// Arithmetic right shift with round-half-away-from-zero.
pub fn shift_round(v: i128, shift: u32) -> i128 {
    if shift == 0 {
        return v;
    }
    let half = 1i128 << (shift - 1);
    if v >= 0 {
        (v + half) >> shift
    } else {
        -((-v + half) >> shift)
    }
}
