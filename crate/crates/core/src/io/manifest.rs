//! JSON tensor manifest plus raw little-endian row-major `f32` files.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::TensorF32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    #[default]
    Weight,
    Activation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: String,
    /// Relative to the manifest's directory.
    pub file: String,
    #[serde(default)]
    pub role: Role,
}

impl ManifestEntry {
    pub fn element_count(&self) -> usize {
        self.shape.iter().product()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tensors: Vec<ManifestEntry>,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl Manifest {
    pub fn new(tensors: Vec<ManifestEntry>, base_dir: impl Into<PathBuf>) -> Self {
        Manifest {
            tensors,
            base_dir: base_dir.into(),
        }
    }

    /// Parses and validates the manifest; tensor files are read lazily.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = super::read_bytes(path)?;
        let mut m: Manifest =
            serde_json::from_slice(&bytes).map_err(|e| Error::from(e).in_layer(&path.display().to_string()))?;
        m.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for t in &self.tensors {
            let bad = |reason: String| Error::InvalidTensor {
                name: t.name.clone(),
                reason,
            };
            if t.dtype != "f32" {
                return Err(bad(format!("dtype `{}` unsupported, only f32", t.dtype)));
            }
            if t.shape.is_empty() || t.shape.contains(&0) {
                return Err(bad(format!("shape {:?} must be nonempty with nonzero dims", t.shape)));
            }
            if !seen.insert(t.name.as_str()) {
                return Err(bad("duplicate tensor name".into()));
            }
        }
        Ok(())
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn entry(&self, name: &str) -> Result<&ManifestEntry> {
        self.tensors
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::InvalidTensor {
                name: name.to_string(),
                reason: "not listed in the manifest".into(),
            })
    }

    pub fn path_of(&self, entry: &ManifestEntry) -> PathBuf {
        self.base_dir.join(&entry.file)
    }

    /// Loads one tensor, checking the file holds exactly `shape` x 4 bytes.
    pub fn read(&self, entry: &ManifestEntry) -> Result<TensorF32> {
        let path = self.path_of(entry);
        let bytes = super::read_bytes(&path)?;
        let want = entry.element_count() * 4;
        if bytes.len() != want {
            return Err(Error::Format {
                offset: bytes.len().min(want),
                reason: format!(
                    "{}: {} bytes, shape {:?} needs {want}",
                    path.display(),
                    bytes.len(),
                    entry.shape
                ),
            }
            .in_layer(&entry.name));
        }
        let data = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        TensorF32::new(entry.name.clone(), entry.shape.clone(), data)
    }

    pub fn read_named(&self, name: &str) -> Result<TensorF32> {
        self.read(self.entry(name)?)
    }

    /// Tensors in manifest order, read one at a time.
    pub fn iter_tensors(&self) -> impl Iterator<Item = Result<TensorF32>> + '_ {
        self.tensors.iter().map(|t| self.read(t))
    }
}

fn file_name_for(name: &str) -> String {
    let safe: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "._-".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}.f32")
}

/// Writes each tensor as `<name>.f32` next to a manifest at `manifest_path`.
pub fn write_tensor_set(manifest_path: &Path, tensors: &[(TensorF32, Role)]) -> Result<Manifest> {
    let dir = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut entries = Vec::with_capacity(tensors.len());
    for (t, role) in tensors {
        let file = file_name_for(t.name());
        let bytes: Vec<u8> = t.data().iter().flat_map(|v| v.to_le_bytes()).collect();
        super::write_atomic(&dir.join(&file), &bytes)?;
        entries.push(ManifestEntry {
            name: t.name().to_string(),
            shape: t.shape().to_vec(),
            dtype: "f32".into(),
            file,
            role: *role,
        });
    }
    let manifest = Manifest::new(entries, dir);
    manifest.validate()?;
    let json = serde_json::to_vec_pretty(&manifest)?;
    super::write_atomic(manifest_path, &json)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let a = TensorF32::new("layer/0", vec![2, 2], vec![1.0, -2.0, 0.5, 3.25]).unwrap();
        let b = TensorF32::vector("act", vec![0.1, 0.2]).unwrap();
        let mp = dir.path().join("m.json");
        write_tensor_set(&mp, &[(a.clone(), Role::Weight), (b.clone(), Role::Activation)]).unwrap();
        let m = Manifest::load(&mp).unwrap();
        assert_eq!(m.tensors[0].file, "layer_0.f32");
        assert_eq!(m.tensors[1].role, Role::Activation);
        let loaded: Vec<TensorF32> = m.iter_tensors().collect::<Result<_>>().unwrap();
        assert_eq!(loaded, vec![a, b]);
    }

    #[test]
    fn size_mismatch_is_named() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("x.f32"), [0u8; 12]).unwrap();
        let json = r#"{"tensors":[{"name":"x","shape":[2,2],"dtype":"f32","file":"x.f32"}]}"#;
        std::fs::write(dir.path().join("m.json"), json).unwrap();
        let m = Manifest::load(&dir.path().join("m.json")).unwrap();
        let err = m.read_named("x").unwrap_err().to_string();
        assert!(err.contains("`x`") && err.contains("needs 16"), "{err}");
    }

    #[test]
    fn validation() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        for bad in [
            r#"{"tensors":[{"name":"x","shape":[2],"dtype":"f16","file":"x"}]}"#,
            r#"{"tensors":[{"name":"x","shape":[0],"dtype":"f32","file":"x"}]}"#,
            r#"{"tensors":[{"name":"x","shape":[1],"dtype":"f32","file":"x"},{"name":"x","shape":[1],"dtype":"f32","file":"y"}]}"#,
            r#"{"tensors": 3}"#,
        ] {
            std::fs::write(&p, bad).unwrap();
            assert!(Manifest::load(&p).is_err(), "{bad}");
        }
        std::fs::write(&p, r#"{"tensors":[]}"#).unwrap();
        assert!(Manifest::load(&p).unwrap().tensors.is_empty());
    }
}
