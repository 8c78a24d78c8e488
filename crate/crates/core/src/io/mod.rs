//! On-disk formats: tensor manifests, the `AQF1` quantized container, sweep
//! reports and workload descriptors. Every file is written through a temp
//! file in the target directory and renamed into place.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub mod container;
pub mod descriptor;
pub mod manifest;
pub mod report;

pub use container::{decode_container, encode_container, read_container, write_container, MAGIC, VERSION};
pub use descriptor::WorkloadDescriptor;
pub use manifest::{write_tensor_set, Manifest, ManifestEntry, Role};
pub use report::{read_sweep_csv, write_summary_json, write_sweep_json, SweepCsvWriter};

/// Writes `path` atomically: the content goes to a temporary sibling that
/// replaces `path` only after a successful flush.
pub fn write_atomic_with<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic_with(path, |w| w.write_all(bytes).map_err(|e| Error::io(path, e)))
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}
