mod common;

use adaptivfloat::analyzer::synth::{generate_suite, Suite, SuiteConfig};
use adaptivfloat::analyzer::{
    calibrate_activation_bias, exponent_search_with, layer_sweep, layer_sweep_streaming, quartiles_type7, rms_error,
    summarize, FormatChoice,
};
use adaptivfloat::{quantize, Execution, FormatKind, FormatSpec, TensorF32};
use rand::Rng;

fn random_layers(seed: u64, count: usize, len: usize) -> Vec<TensorF32> {
    let mut rng = common::rng(seed);
    (0..count)
        .map(|i| {
            let scale = rng.random_range(0.05f32..10.0);
            let data = (0..len).map(|_| rng.random_range(-1.0f32..1.0) * scale).collect();
            TensorF32::new(format!("layer{i}"), vec![len], data).unwrap()
        })
        .collect()
}

#[test]
fn type7_quantiles_match_known_values() {
    // R: quantile(1:10, c(.25, .5, .75)) gives 3.25 5.5 7.75
    let v: Vec<f64> = (1..=10).map(f64::from).collect();
    assert_eq!(quartiles_type7(&v, 0.25), 3.25);
    assert_eq!(quartiles_type7(&v, 0.5), 5.5);
    assert_eq!(quartiles_type7(&v, 0.75), 7.75);
    assert_eq!(quartiles_type7(&[4.0], 0.25), 4.0);
    // R: quantile(c(1, 3, 4, 10), .25) gives 2.5
    assert_eq!(quartiles_type7(&[1.0, 3.0, 4.0, 10.0], 0.25), 2.5);
}

#[test]
fn summary_groups_per_format_and_width() {
    let layers = random_layers(3, 5, 300);
    let rows = layer_sweep(&layers, &FormatChoice::all(), &[4, 8]).unwrap();
    let summary = summarize(&rows);
    assert_eq!(summary.len(), 10);
    for s in &summary {
        let mut want: Vec<f64> = rows
            .iter()
            .filter(|r| r.format == s.format && r.n == s.n)
            .map(|r| r.rms)
            .collect();
        assert_eq!(s.layers, 5);
        let mean = want.iter().sum::<f64>() / 5.0;
        want.sort_by(f64::total_cmp);
        assert_eq!(s.distribution.min, want[0]);
        assert_eq!(s.distribution.median, want[2]);
        assert_eq!(s.distribution.max, want[4]);
        assert_eq!(s.distribution.q1, want[1]);
        assert!((s.distribution.mean - mean).abs() <= 1e-15 * mean);
    }
}

#[test]
fn sweep_rms_matches_direct_computation() {
    let layers = random_layers(4, 2, 257);
    let rows = layer_sweep(&layers, &[FormatChoice::with_exp_bits(FormatKind::Posit, 2)], &[6]).unwrap();
    for (row, layer) in rows.iter().zip(&layers) {
        let q = quantize(layer, FormatSpec::new(FormatKind::Posit, 6, 2).unwrap()).unwrap();
        let dq = q.dequantize().unwrap();
        let ss: f64 = layer
            .data()
            .iter()
            .zip(&dq)
            .map(|(&x, &v)| (f64::from(x) - v).powi(2))
            .sum();
        assert_eq!(row.rms, (ss / 257.0).sqrt());
        assert_eq!((row.min, row.max), (layer.min(), layer.max()));
    }
}

#[test]
fn streaming_sweep_matches_batch_and_execution_modes() {
    let layers = random_layers(5, 4, 200);
    let batch = layer_sweep(&layers, &FormatChoice::all(), &[3, 5, 7]).unwrap();
    for exec in [Execution::Sequential, Execution::Parallel] {
        let mut streamed = Vec::new();
        layer_sweep_streaming(
            layers.iter().cloned().map(Ok),
            &FormatChoice::all(),
            &[3, 5, 7],
            exec,
            |r| {
                streamed.push(r.clone());
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(streamed, batch);
    }
}

#[test]
fn scaling_a_layer_shifts_bias_and_scales_rms() {
    for layer in random_layers(6, 4, 500) {
        let spec = FormatSpec::adaptivfloat(6, 3).unwrap();
        let base = quantize(&layer, spec).unwrap();
        let rb = rms_error(&layer, &base).unwrap();
        for k in -4..=4 {
            let scaled = layer.scaled(2f32.powi(k)).unwrap();
            let q = quantize(&scaled, spec).unwrap();
            assert_eq!(q.codes(), base.codes());
            assert_eq!(q.params().bias_or_scale(), base.params().bias_or_scale() + f64::from(k));
            assert_eq!(rms_error(&scaled, &q).unwrap(), rb * 2f64.powi(k));
        }
    }
}

#[test]
fn exponent_search_picks_the_brute_force_minimum() {
    let layers = random_layers(8, 3, 400);
    for kind in [FormatKind::AdaptivFloat, FormatKind::IeeeLikeFloat, FormatKind::Posit] {
        for n in [4u8, 6, 8] {
            let (best, table) = exponent_search_with(&layers, n, kind, Execution::Sequential).unwrap();
            let mut brute: Option<(u8, f64)> = None;
            for e in kind.exponent_range(n) {
                let spec = FormatSpec::new(kind, n, e).unwrap();
                let mean = layers
                    .iter()
                    .map(|l| rms_error(l, &quantize(l, spec).unwrap()).unwrap())
                    .sum::<f64>()
                    / 3.0;
                if brute.is_none_or(|(_, m)| mean < m) {
                    brute = Some((e, mean));
                }
            }
            assert_eq!(best, brute.unwrap().0, "{kind} n={n}");
            assert_eq!(table.len(), kind.exponent_range(n).count());
        }
    }
}

#[test]
fn calibration_uses_running_max() {
    let batches: Vec<TensorF32> = (1..=4)
        .map(|i| TensorF32::vector("act", vec![0.5 * i as f32, -1.5 * i as f32]).unwrap())
        .collect();
    let rec = calibrate_activation_bias("act", &batches, 3).unwrap();
    assert_eq!(rec.observed_max, 6.0);
    // 6.0 sits in [4, 8): exp_max 2, bias 2 - 7
    assert_eq!(rec.exp_bias, -5);
}

#[test]
fn suite_ranges_follow_the_published_tables() {
    let cfg = SuiteConfig::default();
    for (suite, lo, hi) in [
        (Suite::Narrow, -0.78f32, 1.32f32),
        (Suite::Laplacian, -2.21, 2.39),
        (Suite::Mixture, -12.46, 20.41),
    ] {
        let layers = generate_suite(suite, &cfg);
        assert_eq!(layers.len(), 6);
        assert_eq!(layers[0].min() as f32, lo, "{suite:?}");
        assert_eq!(layers[0].max() as f32, hi, "{suite:?}");
        for l in &layers {
            assert_eq!(l.shape(), &[64, 64]);
            assert!(l.max() <= f64::from(hi) && l.min() >= f64::from(lo));
        }
        assert_eq!(layers, generate_suite(suite, &cfg));
    }
}
