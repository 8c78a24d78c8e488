use adaptivfloat::analyzer::synth::{generate_suite, Suite, SuiteConfig};
use adaptivfloat::analyzer::{layer_sweep_streaming, FormatChoice};
use adaptivfloat::{quantize_with, Execution, FormatKind, FormatSpec, TensorF32};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn quantize(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let len = 1 << 20;
    let data = (0..len).map(|_| rng.random_range(-4.0f32..4.0)).collect();
    let t = TensorF32::vector("w", data).unwrap();
    let mut g = c.benchmark_group("quantize_1m");
    g.throughput(Throughput::Elements(len as u64));
    for kind in [FormatKind::AdaptivFloat, FormatKind::Posit] {
        let spec = FormatSpec::new(kind, 8, kind.default_exp_bits(8)).unwrap();
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(kind.name(), name), &exec, |b, &exec| {
                b.iter(|| quantize_with(black_box(&t), spec, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let layers = generate_suite(Suite::Mixture, &SuiteConfig::default());
    let formats = FormatChoice::all();
    let mut g = c.benchmark_group("layer_sweep");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| {
                let mut rows = 0;
                layer_sweep_streaming(layers.iter().cloned().map(Ok), &formats, &[4, 6, 8], exec, |_| {
                    rows += 1;
                    Ok(())
                })
                .unwrap();
                rows
            })
        });
    }
    g.finish();
}

criterion_group!(benches, quantize, sweep);
criterion_main!(benches);
