use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor::{QuantizedTensor, TensorF32};

/// `sqrt(mean((w - dequant(q))^2))`.
pub fn rms_error(w: &TensorF32, q: &QuantizedTensor) -> Result<f64> {
    if w.shape() != q.shape() {
        return Err(Error::ShapeMismatch {
            left: w.shape().to_vec(),
            right: q.shape().to_vec(),
        });
    }
    let dq = q.dequantize()?;
    Ok(rms_of_values(w.data(), &dq))
}

pub fn rms_of_values(reference: &[f32], approx: &[f64]) -> f64 {
    debug_assert_eq!(reference.len(), approx.len());
    if reference.is_empty() {
        return 0.0;
    }
    let sum: f64 = reference
        .iter()
        .zip(approx)
        .map(|(&w, &d)| {
            let diff = f64::from(w) - d;
            diff * diff
        })
        .sum();
    (sum / reference.len() as f64).sqrt()
}

/// Linear interpolation between order statistics (R type 7) at
/// probability `p` of an ascending slice.
pub fn quartiles_type7(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Spread of per-layer RMS errors for one (format, width) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorDistribution {
    pub values: Vec<f64>,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

impl ErrorDistribution {
    /// `None` for an empty list.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(ErrorDistribution {
            values: values.to_vec(),
            min: sorted[0],
            q1: quartiles_type7(&sorted, 0.25),
            median: quartiles_type7(&sorted, 0.5),
            q3: quartiles_type7(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
            mean: values.iter().sum::<f64>() / values.len() as f64,
        })
    }
}
