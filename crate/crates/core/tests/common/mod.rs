//! Reference models written straight from the format definitions, with no
//! calls into the library's decoders. Exact arithmetic where ties matter.
#![allow(dead_code)]

pub mod pe_oracle;

use adaptivfloat::{enumerate_codebook, nearest_value, quantize, FormatKind, FormatSpec, TensorF32};
use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn p2(k: i32) -> f64 {
    2f64.powi(k)
}

/// Unbiased binary exponent of a positive finite f64, read from its bits.
pub fn exponent_of(x: f64) -> i32 {
    assert!(x > 0.0 && x.is_finite());
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i32;
    if raw == 0 {
        // subnormal: find the top set mantissa bit
        let frac = bits & ((1u64 << 52) - 1);
        -1074 + (63 - frac.leading_zeros() as i32)
    } else {
        raw - 1023
    }
}

fn sign_magnitude_level(code: u16, n: u8) -> i64 {
    let mag = i64::from(code & ((1 << (n - 1)) - 1));
    if code >> (n - 1) == 1 {
        -mag
    } else {
        mag
    }
}

pub fn af_value(code: u16, n: u8, e: u8, bias: i32) -> f64 {
    let m = n - 1 - e;
    let low = code & ((1 << (n - 1)) - 1);
    if low == 0 {
        return 0.0;
    }
    let ef = i32::from(low >> m);
    let mf = f64::from(low & ((1 << m) - 1));
    let v = (1.0 + mf / p2(i32::from(m))) * p2(ef + bias);
    if code >> (n - 1) == 1 {
        -v
    } else {
        v
    }
}

pub fn ieee_value(code: u16, n: u8, e: u8) -> f64 {
    let m = i32::from(n - 1 - e);
    let b = (1i32 << (e - 1)) - 1;
    let low = code & ((1 << (n - 1)) - 1);
    let ef = i32::from(low >> m);
    let mf = f64::from(low & ((1 << m) - 1));
    let v = if ef == 0 {
        mf * p2(1 - b - m)
    } else {
        (1.0 + mf / p2(m)) * p2(ef - b)
    };
    if code >> (n - 1) == 1 {
        -v
    } else {
        v
    }
}

/// `None` for NaR. Parses the code as a bit string: sign, regime run,
/// terminator, up to `es` exponent bits (zero padded), fraction.
pub fn posit_value(code: u16, n: u8, es: u8) -> Option<f64> {
    let full = 1u32 << n;
    let c = u32::from(code);
    if c == 0 {
        return Some(0.0);
    }
    if c == full >> 1 {
        return None;
    }
    let negative = c >= full >> 1;
    let mag = if negative { full - c } else { c };
    let text = format!("{:0width$b}", mag, width = n as usize);
    let body = &text[1..];
    let first = body.as_bytes()[0];
    let run = body.bytes().take_while(|&b| b == first).count();
    let k = if first == b'1' { run as i32 - 1 } else { -(run as i32) };
    let after = body.get(run + 1..).unwrap_or("");
    let exp_len = after.len().min(es as usize);
    let mut exp_bits = after[..exp_len].to_string();
    while exp_bits.len() < es as usize {
        exp_bits.push('0');
    }
    let exp = if es == 0 {
        0
    } else {
        i32::from_str_radix(&exp_bits, 2).unwrap()
    };
    let frac_text = &after[exp_len..];
    let frac = if frac_text.is_empty() {
        0.0
    } else {
        f64::from(u32::from_str_radix(frac_text, 2).unwrap()) / p2(frac_text.len() as i32)
    };
    let v = (1.0 + frac) * p2(k * (1 << es) + exp);
    Some(if negative { -v } else { v })
}

/// Value of every code (`None` for posit NaR) given the per-tensor
/// parameter: AdaptivFloat bias, BFP shared exponent or uniform scale.
pub fn reference_values(spec: FormatSpec, param: f64) -> Vec<Option<f64>> {
    let (n, e) = (spec.n, spec.e);
    (0..1u32 << n)
        .map(|c| {
            let c = c as u16;
            match spec.kind {
                FormatKind::AdaptivFloat => Some(af_value(c, n, e, param as i32)),
                FormatKind::IeeeLikeFloat => Some(ieee_value(c, n, e)),
                FormatKind::BlockFloat => Some(sign_magnitude_level(c, n) as f64 * p2(param as i32 + 2 - i32::from(n))),
                FormatKind::Uniform => Some(sign_magnitude_level(c, n) as f64 * param),
                FormatKind::Posit => posit_value(c, n, e),
            }
        })
        .collect()
}

/// Ascending distinct values of a reference codebook.
pub fn distinct_sorted(values: &[Option<f64>]) -> Vec<f64> {
    let mut v: Vec<f64> = values.iter().flatten().copied().collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Per-tensor parameter the library should derive from `max_abs`,
/// computed independently.
pub fn expected_param(spec: FormatSpec, max_abs: f64) -> f64 {
    match spec.kind {
        FormatKind::AdaptivFloat => f64::from(exponent_of(max_abs) - ((1 << spec.e) - 1)),
        FormatKind::BlockFloat => f64::from(exponent_of(max_abs)),
        FormatKind::Uniform => max_abs / f64::from((1u32 << (spec.n - 1)) - 1),
        FormatKind::IeeeLikeFloat => f64::from((1 << (spec.e - 1)) - 1),
        FormatKind::Posit => 0.0,
    }
}

/// Nearest value with exact distance comparison; exact midpoints go to the
/// larger magnitude, out-of-range inputs to the nearest endpoint.
pub fn nearest_exact(sorted: &[f64], x: f64) -> f64 {
    let idx = sorted.partition_point(|&v| v < x);
    if idx == 0 {
        return sorted[0];
    }
    if idx == sorted.len() {
        return sorted[idx - 1];
    }
    let (lo, hi) = (sorted[idx - 1], sorted[idx]);
    let (fl, fh) = (x - lo, hi - x);
    if (fl - fh).abs() > 1e-9 * fl.max(fh) {
        return if fl < fh { lo } else { hi };
    }
    let r = |v: f64| BigRational::from_float(v).expect("finite");
    let rx = r(x);
    let dl = (&rx - r(lo)).abs();
    let dh = (r(hi) - &rx).abs();
    match dl.cmp(&dh) {
        std::cmp::Ordering::Less => lo,
        std::cmp::Ordering::Greater => hi,
        std::cmp::Ordering::Equal => {
            if hi.abs() >= lo.abs() {
                hi
            } else {
                lo
            }
        }
    }
}

/// A stress mix around a codebook: uniform draws, log-uniform magnitudes,
/// exact grid points, exact midpoints (when f32 holds them), values around
/// the smallest magnitude and values past the ends. Draws failing `keep`
/// are discarded.
pub fn stress_inputs(rng: &mut ChaCha8Rng, sorted: &[f64], count: usize, keep: impl Fn(f32) -> bool) -> Vec<f32> {
    let top = sorted.last().copied().unwrap().abs().max(sorted[0].abs());
    let smallest = sorted
        .iter()
        .copied()
        .filter(|v| *v > 0.0)
        .fold(f64::INFINITY, f64::min);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let x = match rng.random_range(0..7) {
            0 | 1 => rng.random_range(-1.1..1.1) * top,
            2 => sign * (smallest / 8.0) * (top * 16.0 / smallest).powf(rng.random::<f64>()),
            3 => sorted[rng.random_range(0..sorted.len())],
            4 => {
                let i = rng.random_range(0..sorted.len() - 1);
                (sorted[i] + sorted[i + 1]) / 2.0
            }
            5 => sign * smallest * rng.random_range(0.0..1.5),
            _ => sign * top * rng.random_range(1.0..4.0),
        };
        let f = x as f32;
        if f.is_finite() && keep(f) {
            out.push(f);
        }
    }
    out
}

pub fn tensor(name: &str, data: Vec<f32>) -> TensorF32 {
    TensorF32::vector(name, data).unwrap()
}

/// Every (n, e) pair for a kind within the given width range.
pub fn configs(kind: FormatKind, widths: std::ops::RangeInclusive<u8>) -> Vec<FormatSpec> {
    let mut v = Vec::new();
    for n in widths {
        for e in kind.exponent_range(n) {
            v.push(FormatSpec::new(kind, n, e).unwrap());
        }
    }
    v
}

/// Largest magnitude the stress tensor may hold without changing the
/// per-tensor parameter fixed by `pin`.
fn keeps_param(spec: FormatSpec, pin: f32) -> impl Fn(f32) -> bool {
    let limit = match spec.kind {
        FormatKind::AdaptivFloat | FormatKind::BlockFloat => p2(exponent_of(f64::from(pin)) + 1),
        FormatKind::Uniform => f64::from(pin),
        FormatKind::IeeeLikeFloat | FormatKind::Posit => f64::INFINITY,
    };
    let strict = spec.kind != FormatKind::Uniform;
    move |x: f32| {
        let a = f64::from(x.abs());
        if strict {
            a < limit
        } else {
            a <= limit
        }
    }
}

#[derive(Debug, Default)]
pub struct OracleOutcome {
    pub checked: usize,
    /// Elements where the codec disagrees with the exact reference.
    pub codec_mismatches: usize,
    /// Elements where the library's own codebook search disagrees.
    pub search_mismatches: usize,
    pub param_ok: bool,
}

/// Quantizes `count` stress inputs through the library codec and compares
/// every element with the exact nearest reference value, and with
/// `nearest_value` over the library's enumerated codebook.
pub fn oracle_check(spec: FormatSpec, seed: u64, count: usize) -> OracleOutcome {
    let mut rng = rng(seed);
    let pin: f32 = match spec.kind {
        FormatKind::IeeeLikeFloat | FormatKind::Posit => 1.0,
        _ => (2f64.powf(rng.random_range(-6.0..6.0))) as f32,
    };
    let param = expected_param(spec, f64::from(pin));
    let reference = reference_values(spec, param);
    let sorted = distinct_sorted(&reference);
    let mut data = vec![pin];
    data.extend(stress_inputs(&mut rng, &sorted, count - 1, keeps_param(spec, pin)));
    if matches!(spec.kind, FormatKind::IeeeLikeFloat | FormatKind::Posit) {
        data[0] = data[1];
    }
    let t = tensor("stress", data);
    let q = quantize(&t, spec).unwrap();
    let got_param = q.params().bias_or_scale();
    let cb = enumerate_codebook(spec, param).unwrap();
    let dq = q.dequantize().unwrap();
    let codes = q.codes();
    let mut out = OracleOutcome {
        checked: t.len(),
        param_ok: got_param == param,
        ..Default::default()
    };
    for (i, &x) in t.data().iter().enumerate() {
        let want = nearest_exact(&sorted, f64::from(x));
        let by_code = reference[codes[i] as usize];
        if dq[i] != want || by_code != Some(want) {
            out.codec_mismatches += 1;
        }
        if nearest_value(&cb, f64::from(x)).1 != want {
            out.search_mismatches += 1;
        }
    }
    out
}
