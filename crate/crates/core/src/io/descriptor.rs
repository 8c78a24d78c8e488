//! JSON workload descriptor: workload shape, tensor references into a
//! manifest, PE settings and optional calibration records.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::manifest::Manifest;
use crate::error::{Error, Result};
use crate::pe::workload::{PeSettings, Workload, WorkloadCalibration, WorkloadKind};
use crate::pe::Activation;

fn default_activation() -> Activation {
    Activation::Identity
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadDescriptor {
    pub kind: WorkloadKind,
    pub timesteps: usize,
    pub input_dim: usize,
    /// LSTM hidden size, or GEMV output rows.
    pub hidden: usize,
    /// Manifest path, relative to the descriptor.
    pub manifest: String,
    pub weight: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<String>,
    pub inputs: String,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    #[serde(default)]
    pub pe: PeSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<WorkloadCalibration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calib_batches: Option<usize>,
}

impl WorkloadDescriptor {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = super::read_bytes(path)?;
        serde_json::from_slice(&bytes).map_err(|e| Error::from(e).in_layer(&path.display().to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        super::write_atomic(path, &serde_json::to_vec_pretty(self)?)
    }

    /// Loads the referenced tensors (resolved against `descriptor_dir`) and
    /// checks them against the declared dimensions.
    pub fn to_workload(&self, descriptor_dir: &Path) -> Result<Workload> {
        let manifest = Manifest::load(&descriptor_dir.join(&self.manifest))?;
        let weight = manifest.read_named(&self.weight)?;
        let bias = self.bias.as_deref().map(|b| manifest.read_named(b)).transpose()?;
        let inputs = manifest.read_named(&self.inputs)?;
        let wl = match self.kind {
            WorkloadKind::Gemv => Workload::gemv(weight, bias, inputs, self.activation)?,
            WorkloadKind::Lstm => Workload::lstm(weight, bias, inputs)?,
        };
        let got = (wl.timesteps(), wl.input_dim(), wl.hidden());
        let want = (self.timesteps, self.input_dim, self.hidden);
        if got != want {
            return Err(Error::ShapeMismatch {
                left: vec![want.0, want.1, want.2],
                right: vec![got.0, got.1, got.2],
            });
        }
        Ok(wl)
    }
}
