//! Quantization error analysis: per-layer RMS error sweeps across formats
//! and widths, exponent-width search and activation bias calibration.

mod calibration;
mod stats;
mod sweep;
pub mod synth;

pub use calibration::{calibrate_activation_bias, CalibrationRecord};
pub use stats::{quartiles_type7, rms_error, rms_of_values, ErrorDistribution};
pub use sweep::{
    exponent_search, exponent_search_with, layer_sweep, layer_sweep_streaming, summarize, FormatChoice, LayerStats,
    SweepSummaryRow,
};
