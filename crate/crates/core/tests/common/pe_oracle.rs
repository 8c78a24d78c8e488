//! Arbitrary-precision models of the two PE datapaths.

use adaptivfloat::pe::{
    hfint_pe_forward, int_pe_forward, AccWidthMode, Activation, HfintPeConfig, HfintPostStage, IntPeConfig,
    IntPostScale, Matrix,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{af_value, distinct_sorted, nearest_exact};

pub fn round_half_away(r: &BigRational) -> BigInt {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mag = (r.abs() + half).floor().to_integer();
    if r.is_negative() {
        -mag
    } else {
        mag
    }
}

pub fn saturate(v: &BigInt, n: u8) -> BigInt {
    let top = BigInt::from((1i64 << (n - 1)) - 1);
    if v > &top {
        top
    } else if v < &-&top {
        -top
    } else {
        v.clone()
    }
}

fn pow2(k: i32) -> BigRational {
    let one = BigInt::one();
    if k >= 0 {
        BigRational::from_integer(one << k as usize)
    } else {
        BigRational::new(one.clone(), one << (-k) as usize)
    }
}

fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

#[derive(Debug, Default, Clone, Copy)]
pub struct PeOracleOutcome {
    pub vectors: usize,
    pub mismatches: usize,
}

fn pick_activation(rng: &mut ChaCha8Rng) -> Activation {
    if rng.random::<bool>() {
        Activation::Identity
    } else {
        Activation::Relu
    }
}

/// Random INT PE configurations and operands; every output row is checked
/// for its accumulator, post-scale integer, output level and code.
pub fn int_oracle(rng: &mut ChaCha8Rng, vectors: usize) -> PeOracleOutcome {
    let mut out = PeOracleOutcome::default();
    while out.vectors < vectors {
        let n = rng.random_range(2u8..=12);
        let lanes = [1u32, 4, 16, 64][rng.random_range(0..4)];
        let h = rng.random_range(1u32..=512);
        let cfg = IntPeConfig::with_defaults(n, lanes, h).unwrap();
        let cols = rng.random_range(1..=h.min(300)) as usize;
        let rows = rng.random_range(1..=8usize);
        let (lo, hi) = cfg.operand_range();
        let w: Vec<i32> = (0..rows * cols).map(|_| rng.random_range(lo..=hi)).collect();
        let x: Vec<i32> = (0..cols).map(|_| rng.random_range(lo..=hi)).collect();
        let mult = rng.random_range(0u64..1 << cfg.scale_bits());
        let post = IntPostScale::from_multiplier(&cfg, mult).unwrap();
        let act = pick_activation(rng);
        let m = Matrix::new(rows, cols, w.clone()).unwrap();
        let (levels, trace) = int_pe_forward(&cfg, &m, &x, &post, act).unwrap();
        for r in 0..rows {
            out.vectors += 1;
            let acc: BigInt = (0..cols)
                .map(|c| BigInt::from(w[r * cols + c]) * BigInt::from(x[c]))
                .sum();
            let scaled = BigRational::from_integer(&acc * BigInt::from(mult)) * pow2(-(cfg.frac_bits() as i32));
            let shifted = round_half_away(&scaled);
            let mut level = saturate(&shifted, n);
            if act == Activation::Relu && level.is_negative() {
                level = BigInt::zero();
            }
            let level = level.to_i32().unwrap();
            let code = (level as u32 & ((1u32 << n) - 1)) as u16;
            let rec = trace.records()[r];
            let ok = BigInt::from(rec.acc) == acc
                && BigInt::from(rec.post_scale) == shifted
                && !rec.overflow
                && rec.output_code == code
                && levels[r] == level;
            if !ok {
                out.mismatches += 1;
            }
        }
    }
    out
}

/// Random HFINT configurations and codes; the accumulator must equal the
/// exact sum of decoded products in units of its LSB, and the output code
/// must be the exact nearest AdaptivFloat value of the activated integer.
pub fn hfint_oracle(rng: &mut ChaCha8Rng, vectors: usize) -> PeOracleOutcome {
    let mut out = PeOracleOutcome::default();
    while out.vectors < vectors {
        let n = rng.random_range(4u8..=8);
        let e = rng.random_range(1..=n - 2);
        let lanes = [1u32, 4, 16, 64][rng.random_range(0..4)];
        let h = rng.random_range(1u32..=512);
        let (wb, ab, ob) = (
            rng.random_range(-8..=7),
            rng.random_range(-8..=7),
            rng.random_range(-8..=7),
        );
        let Ok(cfg) = HfintPeConfig::new(n, e, lanes, h, AccWidthMode::Checked) else {
            // wide exponents with large H exceed the register model
            continue;
        };
        let cfg = cfg.with_biases(wb, ab, ob).unwrap();
        let cols = rng.random_range(1..=h.min(300)) as usize;
        let rows = rng.random_range(1..=8usize);
        let w: Vec<u16> = (0..rows * cols).map(|_| rng.random_range(0..1u16 << n)).collect();
        let x: Vec<u16> = (0..cols).map(|_| rng.random_range(0..1u16 << n)).collect();
        let shift = rng.random_range(0u32..=24);
        let post = HfintPostStage::new(shift);
        let act = pick_activation(rng);
        let m = Matrix::new(rows, cols, w.clone()).unwrap();
        let (codes, trace) = hfint_pe_forward(&cfg, &m, &x, &post, act).unwrap();
        let out_ref: Vec<Option<f64>> = (0..1u32 << n).map(|c| Some(af_value(c as u16, n, e, ob))).collect();
        let out_sorted = distinct_sorted(&out_ref);
        let lsb = cfg.acc_lsb_exp();
        for r in 0..rows {
            out.vectors += 1;
            let sum: BigRational = (0..cols)
                .map(|c| exact(af_value(w[r * cols + c], n, e, wb)) * exact(af_value(x[c], n, e, ab)))
                .fold(BigRational::zero(), |a, b| a + b);
            let ticks = &sum * pow2(-lsb);
            let rec = trace.records()[r];
            let acc_ok = ticks.is_integer() && BigInt::from(rec.acc) == ticks.to_integer();
            let shifted = round_half_away(&(ticks * pow2(-(shift as i32))));
            let mut v = saturate(&shifted, n);
            if act == Activation::Relu && v.is_negative() {
                v = BigInt::zero();
            }
            let value = (BigRational::from_integer(v) * pow2(lsb + shift as i32))
                .to_f64()
                .unwrap();
            let want = nearest_exact(&out_sorted, value);
            let codec = cfg.out_params().quantize_value(value);
            let ok = acc_ok
                && BigInt::from(rec.post_scale) == shifted
                && !rec.overflow
                && rec.output_code == codes[r]
                && af_value(codes[r], n, e, ob) == want
                && codes[r] == codec;
            if !ok {
                out.mismatches += 1;
            }
        }
    }
    out
}
