use serde::{Deserialize, Serialize};

use crate::adaptivfloat::{default_exp_bias, derive_exp_bias};
use crate::error::{Error, Result};
use crate::tensor::TensorF32;

/// Activation statistics gathered over calibration batches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub name: String,
    pub observed_max: f64,
    pub exp_bias: i32,
    /// Set when every observed activation was zero; `exp_bias` then holds
    /// the all-zero default.
    pub degenerate: bool,
}

/// Running max of `|A|` over `batches`, with the bias derived once at the end.
pub fn calibrate_activation_bias(name: &str, batches: &[TensorF32], e: u8) -> Result<CalibrationRecord> {
    if batches.is_empty() {
        return Err(Error::config("calibration needs at least one batch"));
    }
    let observed_max = batches.iter().map(TensorF32::max_abs).fold(0.0, f64::max);
    let (exp_bias, degenerate) = match derive_exp_bias(observed_max, e) {
        Some(b) => (b, false),
        None => (default_exp_bias(e), true),
    };
    Ok(CalibrationRecord {
        name: name.to_string(),
        observed_max,
        exp_bias,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(max: f32) -> TensorF32 {
        TensorF32::vector("a", vec![0.1, -max, max / 2.0]).unwrap()
    }

    #[test]
    fn running_max_over_batches() {
        let rec = calibrate_activation_bias("act", &[batch(1.9), batch(3.5), batch(2.2)], 3).unwrap();
        assert_eq!(rec.observed_max, f64::from(3.5f32));
        assert_eq!(rec.exp_bias, -6);
        assert!(!rec.degenerate);
    }

    #[test]
    fn single_and_repeated_batches() {
        let one = calibrate_activation_bias("a", &[batch(0.7)], 3).unwrap();
        assert_eq!(Some(one.exp_bias), derive_exp_bias(f64::from(0.7f32), 3));
        let many = calibrate_activation_bias("a", &vec![batch(0.7); 9], 3).unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn zero_activations_flagged() {
        let z = TensorF32::vector("z", vec![0.0; 4]).unwrap();
        let rec = calibrate_activation_bias("z", &[z], 3).unwrap();
        assert!(rec.degenerate);
        assert_eq!(rec.exp_bias, -7);
        assert!(calibrate_activation_bias("z", &[], 3).is_err());
    }
}
