use serde::{Deserialize, Serialize};

use super::stats::{rms_error, ErrorDistribution};
use crate::codec::quantize_with;
use crate::error::{Error, Result};
use crate::format::{FormatKind, FormatSpec};
use crate::par::{self, Execution};
use crate::tensor::TensorF32;

/// A format to sweep; `exp_bits: None` picks the kind's default width at
/// each `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FormatChoice {
    pub kind: FormatKind,
    pub exp_bits: Option<u8>,
}

impl FormatChoice {
    pub fn new(kind: FormatKind) -> Self {
        FormatChoice { kind, exp_bits: None }
    }

    pub fn with_exp_bits(kind: FormatKind, e: u8) -> Self {
        FormatChoice {
            kind,
            exp_bits: Some(e),
        }
    }

    pub fn all() -> Vec<FormatChoice> {
        FormatKind::ALL.iter().copied().map(FormatChoice::new).collect()
    }

    pub fn spec(&self, n: u8) -> Result<FormatSpec> {
        let e = self.exp_bits.unwrap_or_else(|| self.kind.default_exp_bits(n));
        FormatSpec::new(self.kind, n, e)
    }
}

/// One row of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStats {
    pub layer: String,
    pub format: FormatKind,
    pub n: u8,
    pub e: u8,
    pub bias_or_scale: f64,
    pub rms: f64,
    pub min: f64,
    pub max: f64,
}

fn check_inputs(formats: &[FormatChoice], widths: &[u8]) -> Result<Vec<(FormatChoice, u8)>> {
    if formats.is_empty() || widths.is_empty() {
        return Err(Error::config("sweep needs at least one format and one width"));
    }
    let mut cells = Vec::with_capacity(formats.len() * widths.len());
    for &f in formats {
        for &n in widths {
            f.spec(n)?;
            cells.push((f, n));
        }
    }
    Ok(cells)
}

fn sweep_layer(layer: &TensorF32, cells: &[(FormatChoice, u8)], exec: Execution) -> Result<Vec<LayerStats>> {
    let (min, max) = (layer.min(), layer.max());
    par::map(exec, cells, |&(choice, n)| {
        let spec = choice.spec(n)?;
        let q = quantize_with(layer, spec, exec)?;
        Ok(LayerStats {
            layer: layer.name().to_string(),
            format: spec.kind,
            n,
            e: spec.e,
            bias_or_scale: q.params().bias_or_scale(),
            rms: rms_error(layer, &q)?,
            min,
            max,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()
    .map_err(|e| e.in_layer(layer.name()))
}

/// Full cross product, ordered by layer, then format, then width (in the
/// order given).
pub fn layer_sweep(layers: &[TensorF32], formats: &[FormatChoice], widths: &[u8]) -> Result<Vec<LayerStats>> {
    if layers.is_empty() {
        return Err(Error::config("sweep needs at least one layer"));
    }
    let mut rows = Vec::new();
    layer_sweep_streaming(
        layers.iter().cloned().map(Ok),
        formats,
        widths,
        Execution::default(),
        |r| {
            rows.push(r.clone());
            Ok(())
        },
    )?;
    Ok(rows)
}

/// Like [`layer_sweep`] but pulls layers one at a time and hands each row
/// to `sink` as soon as its layer is done, so memory stays bounded by one
/// layer.
pub fn layer_sweep_streaming<I, F>(
    layers: I,
    formats: &[FormatChoice],
    widths: &[u8],
    exec: Execution,
    mut sink: F,
) -> Result<()>
where
    I: IntoIterator<Item = Result<TensorF32>>,
    F: FnMut(&LayerStats) -> Result<()>,
{
    let cells = check_inputs(formats, widths)?;
    for layer in layers {
        let layer = layer?;
        for row in sweep_layer(&layer, &cells, exec)? {
            sink(&row)?;
        }
    }
    Ok(())
}

/// The exponent width minimizing mean RMS error across `layers`; ties go
/// to the smaller width. Kinds without an exponent field return 0.
pub fn exponent_search(layers: &[TensorF32], n: u8, kind: FormatKind) -> Result<u8> {
    exponent_search_with(layers, n, kind, Execution::default()).map(|(e, _)| e)
}

/// Also returns the mean RMS error of every candidate width.
pub fn exponent_search_with(
    layers: &[TensorF32],
    n: u8,
    kind: FormatKind,
    exec: Execution,
) -> Result<(u8, Vec<(u8, f64)>)> {
    if layers.is_empty() {
        return Err(Error::config("exponent search needs at least one layer"));
    }
    let candidates: Vec<u8> = kind.exponent_range(n).collect();
    if candidates.is_empty() {
        return Err(Error::config(format!("{kind} has no valid exponent width at n = {n}")));
    }
    let means = par::map(exec, &candidates, |&e| -> Result<(u8, f64)> {
        let spec = FormatSpec::new(kind, n, e)?;
        let mut total = 0.0;
        for layer in layers {
            total += rms_error(layer, &quantize_with(layer, spec, exec)?)?;
        }
        Ok((e, total / layers.len() as f64))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut best = means[0];
    for &(e, mean) in &means[1..] {
        if mean < best.1 {
            best = (e, mean);
        }
    }
    Ok((best.0, means))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummaryRow {
    pub format: FormatKind,
    pub n: u8,
    pub e: u8,
    pub layers: usize,
    pub distribution: ErrorDistribution,
}

/// Groups rows by (format, n) in first-seen order and summarizes their
/// per-layer RMS errors.
pub fn summarize(rows: &[LayerStats]) -> Vec<SweepSummaryRow> {
    let mut keys: Vec<(FormatKind, u8, u8)> = Vec::new();
    for r in rows {
        let key = (r.format, r.n, r.e);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .filter_map(|(format, n, e)| {
            let values: Vec<f64> = rows
                .iter()
                .filter(|r| r.format == format && r.n == n && r.e == e)
                .map(|r| r.rms)
                .collect();
            Some(SweepSummaryRow {
                format,
                n,
                e,
                layers: values.len(),
                distribution: ErrorDistribution::from_values(&values)?,
            })
        })
        .collect()
}
