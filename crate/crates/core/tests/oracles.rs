mod common;

use std::collections::HashMap;

use adaptivfloat::baseline::{IeeeLikeParams, PositParams};
use adaptivfloat::{enumerate_codebook, nearest_value, AdaptivFloatParams, FormatKind, FormatSpec, QuantParams};
use common::*;

fn params_for(kind: FormatKind) -> Vec<f64> {
    match kind {
        FormatKind::AdaptivFloat => vec![-10.0, -3.0, 0.0, 4.0],
        FormatKind::BlockFloat => vec![-5.0, 0.0, 4.0],
        FormatKind::Uniform => vec![1.0 / 7.0, 0.03125, 2.5],
        _ => vec![0.0],
    }
}

#[test]
fn enumerated_codebooks_match_reference_decoders() {
    for kind in FormatKind::ALL {
        for spec in configs(kind, 3..=12) {
            for param in params_for(kind) {
                let cb = enumerate_codebook(spec, param).unwrap();
                let reference = reference_values(spec, param);
                let got: HashMap<u16, f64> = cb.entries().iter().map(|e| (e.code.bits(), e.value)).collect();
                for (code, want) in reference.iter().enumerate() {
                    assert_eq!(
                        got.get(&(code as u16)).copied(),
                        *want,
                        "{spec} param {param} code {code:#x}"
                    );
                }
                assert_eq!(cb.distinct_values(), distinct_sorted(&reference), "{spec}");
            }
        }
    }
}

#[test]
fn sixteen_bit_codebooks_match_reference() {
    for spec in [
        FormatSpec::new(FormatKind::AdaptivFloat, 16, 5).unwrap(),
        FormatSpec::new(FormatKind::IeeeLikeFloat, 16, 5).unwrap(),
        FormatSpec::new(FormatKind::Posit, 16, 1).unwrap(),
        FormatSpec::new(FormatKind::BlockFloat, 16, 0).unwrap(),
    ] {
        let cb = enumerate_codebook(spec, 0.0).unwrap();
        let reference = reference_values(spec, 0.0);
        for e in cb.entries() {
            assert_eq!(Some(e.value), reference[e.code.bits() as usize], "{spec}");
        }
    }
}

#[test]
fn known_values() {
    // half precision layout: 1 sign, 5 exponent, 10 mantissa, bias 15
    let h = IeeeLikeParams::new(16, 5).unwrap();
    assert_eq!(h.decode(0x3c00), 1.0);
    assert_eq!(h.decode(0x0001), 2f64.powi(-24));
    assert_eq!(h.decode(0x7bff), 65504.0);
    // the all-ones exponent holds ordinary values
    assert_eq!(h.decode(0x7c00), 65536.0);
    let p = PositParams::new(8, 0).unwrap();
    assert_eq!(p.decode(0x40).unwrap(), 1.0);
    assert_eq!(p.decode(0x7f).unwrap(), 64.0);
    assert_eq!(p.decode(0x01).unwrap(), 1.0 / 64.0);
    assert!(p.decode(0x80).is_err());
    let af = AdaptivFloatParams::new(8, 3, -3).unwrap();
    assert_eq!(af.value_max(), 31.0);
    assert_eq!(af.value_min(), 2f64.powi(-3) * (1.0 + 1.0 / 16.0));
}

#[test]
fn every_codec_agrees_with_exact_nearest() {
    let specs: Vec<FormatSpec> = FormatKind::ALL.iter().flat_map(|&k| configs(k, 4..=8)).collect();
    let failures: Vec<String> = std::thread::scope(|s| {
        let handles: Vec<_> = specs
            .iter()
            .enumerate()
            .map(|(i, &spec)| {
                s.spawn(move || {
                    let r = oracle_check(spec, 0x5eed + i as u64, 100_000);
                    let ok = r.param_ok && r.codec_mismatches == 0 && r.search_mismatches == 0;
                    (!ok).then(|| format!("{spec}: {r:?}"))
                })
            })
            .collect();
        handles.into_iter().filter_map(|h| h.join().unwrap()).collect()
    });
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn wide_codecs_agree_with_exact_nearest() {
    for spec in [
        FormatSpec::new(FormatKind::AdaptivFloat, 12, 4).unwrap(),
        FormatSpec::new(FormatKind::IeeeLikeFloat, 12, 5).unwrap(),
        FormatSpec::new(FormatKind::Posit, 12, 1).unwrap(),
        FormatSpec::new(FormatKind::Uniform, 16, 0).unwrap(),
        FormatSpec::new(FormatKind::BlockFloat, 16, 0).unwrap(),
    ] {
        let r = oracle_check(spec, 99, 20_000);
        assert!(
            r.param_ok && r.codec_mismatches == 0 && r.search_mismatches == 0,
            "{spec}: {r:?}"
        );
    }
}

#[test]
fn nearest_value_returns_members_unchanged() {
    for kind in FormatKind::ALL {
        for spec in configs(kind, 3..=10) {
            let cb = enumerate_codebook(spec, params_for(kind)[0]).unwrap();
            for &v in &cb.distinct_values() {
                assert_eq!(nearest_value(&cb, v).1, v, "{spec}");
            }
        }
    }
}

#[test]
fn sign_magnitude_codebooks_closed_under_negation() {
    for kind in FormatKind::ALL {
        for spec in configs(kind, 3..=10) {
            let cb = enumerate_codebook(spec, params_for(kind)[0]).unwrap();
            let vals = cb.distinct_values();
            for &v in &vals {
                assert!(vals.contains(&-v), "{spec}: {v}");
            }
        }
    }
}

#[test]
fn decode_encode_round_trip_all_codes() {
    for kind in FormatKind::ALL {
        for spec in configs(kind, 3..=12) {
            let params = QuantParams::from_spec(spec, params_for(kind)[0]).unwrap();
            for code in 0..(1u32 << spec.n) as u16 {
                let Ok(v) = params.decode(code) else {
                    assert_eq!(kind, FormatKind::Posit);
                    continue;
                };
                let back = params.encode(v).unwrap();
                assert_eq!(params.decode(back).unwrap(), v, "{spec} {code:#x}");
                if v != 0.0 {
                    assert_eq!(back, code, "{spec} {code:#x}");
                }
            }
        }
    }
}

#[test]
fn adaptivfloat_cardinality_and_code_order() {
    for n in 3..=12u8 {
        for e in 1..=(n - 2).min(8) {
            let spec = FormatSpec::adaptivfloat(n, e).unwrap();
            let cb = enumerate_codebook(spec, -4.0).unwrap();
            assert_eq!(cb.distinct_values().len(), (1 << n) - 1, "{spec}");
            let p = AdaptivFloatParams::new(n, e, -4).unwrap();
            let positive: Vec<u16> = (1..1u16 << (n - 1)).collect();
            for w in positive.windows(2) {
                assert!(p.decode(w[0]) < p.decode(w[1]), "{spec}: {:#x} vs {:#x}", w[0], w[1]);
            }
        }
    }
}

#[test]
fn posit_order_matches_signed_code_order() {
    for n in 3..=12u8 {
        for es in FormatKind::Posit.exponent_range(n) {
            let p = PositParams::new(n, es).unwrap();
            let mut codes: Vec<u16> = (0..1u32 << n).map(|c| c as u16).filter(|&c| c != p.nar()).collect();
            codes.sort_by_key(|&c| p.as_signed(c));
            let values: Vec<f64> = codes.iter().map(|&c| p.decode(c).unwrap()).collect();
            assert!(values.windows(2).all(|w| w[0] < w[1]), "posit<{n},{es}>");
        }
    }
}
