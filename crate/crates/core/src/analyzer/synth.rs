//! Fixed-seed synthetic weight suites standing in for real model layers,
//! spanning narrow to very wide value ranges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::tensor::TensorF32;

pub const DEFAULT_SEED: u64 = 0x00AF_2020;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    /// Narrow Gaussian (sigma 0.15), range `[-0.78, 1.32]`; CNN-like.
    Narrow,
    /// Heavy-tailed Laplacian, range `[-2.21, 2.39]`; recurrent-model-like.
    Laplacian,
    /// Gaussian bulk plus wide outliers, range `[-12.46, 20.41]`;
    /// attention-model-like.
    Mixture,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Narrow, Suite::Laplacian, Suite::Mixture];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Narrow => "narrow",
            Suite::Laplacian => "laplacian",
            Suite::Mixture => "mixture",
        }
    }

    /// `(min, max)` of the suite's widest layer.
    pub fn range(self) -> (f32, f32) {
        match self {
            Suite::Narrow => (-0.78, 1.32),
            Suite::Laplacian => (-2.21, 2.39),
            Suite::Mixture => (-12.46, 20.41),
        }
    }

    /// Default per-layer range shrink, in thousandths.
    pub fn default_decay_permille(self) -> u32 {
        match self {
            Suite::Narrow | Suite::Laplacian => 900,
            Suite::Mixture => 750,
        }
    }

    fn tag(self) -> u64 {
        match self {
            Suite::Narrow => 1,
            Suite::Laplacian => 2,
            Suite::Mixture => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub layers: usize,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    /// Per-layer range shrink: layer `i` spans `range * decay^i`. `None`
    /// uses the suite's own default.
    pub decay_permille: Option<u32>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            layers: 6,
            rows: 64,
            cols: 64,
            seed: DEFAULT_SEED,
            decay_permille: None,
        }
    }
}

/// Layers named `<suite>.<i>`, each `rows x cols`. Layer `i` is drawn from
/// the suite's body distribution scaled by `decay^i`, clipped to the scaled
/// range, and has its two extremes pinned to the range endpoints.
pub fn generate_suite(suite: Suite, cfg: &SuiteConfig) -> Vec<TensorF32> {
    let permille = cfg.decay_permille.unwrap_or(suite.default_decay_permille());
    let decay = f64::from(permille) / 1000.0;
    (0..cfg.layers)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (suite.tag() << 32) ^ i as u64);
            let f = decay.powi(i as i32);
            let (lo, hi) = suite.range();
            let (lo, hi) = (f64::from(lo) * f, f64::from(hi) * f);
            let len = cfg.rows * cfg.cols;
            let mut data: Vec<f32> = (0..len)
                .map(|_| (body_sample(suite, f, &mut rng).clamp(lo, hi)) as f32)
                .collect();
            if len >= 2 {
                let a = rng.random_range(0..len);
                let mut b = rng.random_range(0..len);
                if b == a {
                    b = (a + 1) % len;
                }
                data[a] = lo as f32;
                data[b] = hi as f32;
            }
            TensorF32::new(format!("{}.{i}", suite.name()), vec![cfg.rows, cfg.cols], data)
                .expect("finite synthetic data")
        })
        .collect()
}

fn body_sample(suite: Suite, f: f64, rng: &mut ChaCha8Rng) -> f64 {
    match suite {
        Suite::Narrow => Normal::new(0.0, 0.15 * f).unwrap().sample(rng),
        Suite::Laplacian => laplace(0.25 * f, rng),
        Suite::Mixture => {
            if rng.random::<f64>() < 0.02 {
                Normal::new(0.0, 4.0 * f).unwrap().sample(rng)
            } else {
                Normal::new(0.0, 0.8 * f).unwrap().sample(rng)
            }
        }
    }
}

fn laplace(b: f64, rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random::<f64>() - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}
