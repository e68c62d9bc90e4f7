//! Named-tensor container: raw little-endian `f64` data in `tensors.bin`
//! plus a JSON manifest recording each tensor's name, shape and offset.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Tensor;
use crate::error::{Error, Result};

pub const DATA_FILE: &str = "tensors.bin";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: [usize; 2],
    /// Offset in `f64` elements.
    pub offset: usize,
    pub trainable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub meta: serde_json::Value,
    pub tensors: Vec<TensorEntry>,
}

const FORMAT: &str = "mechnet-tensors-v1";

pub fn save_tensors(
    dir: &Path,
    named: &[(String, &Tensor)],
    meta: serde_json::Value,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut data = Vec::new();
    let mut entries = Vec::new();
    let mut offset = 0;
    for (name, t) in named {
        entries.push(TensorEntry {
            name: name.clone(),
            shape: [t.rows, t.cols],
            offset,
            trainable: t.requires_grad,
        });
        offset += t.len();
        for v in &t.values {
            data.extend_from_slice(&v.to_le_bytes());
        }
    }
    let manifest = Manifest {
        format: FORMAT.into(),
        meta,
        tensors: entries,
    };
    let bin = dir.join(DATA_FILE);
    fs::write(&bin, data).map_err(|e| Error::io(&bin, e))?;
    let man = dir.join(MANIFEST_FILE);
    fs::write(&man, serde_json::to_string_pretty(&manifest)? + "\n").map_err(|e| Error::io(&man, e))
}

pub fn load_tensors(dir: &Path) -> Result<(serde_json::Value, Vec<(String, Tensor)>)> {
    let man_path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&man_path).map_err(|e| Error::io(&man_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    if manifest.format != FORMAT {
        return Err(Error::Contract(format!(
            "unknown checkpoint format {:?}",
            manifest.format
        )));
    }
    let bin = dir.join(DATA_FILE);
    let bytes = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Contract(format!(
            "{} is not a whole number of f64",
            bin.display()
        )));
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let mut out = Vec::new();
    for e in manifest.tensors {
        let len = e.shape[0] * e.shape[1];
        let slice = data.get(e.offset..e.offset + len).ok_or_else(|| {
            Error::Contract(format!("tensor {} overruns {}", e.name, bin.display()))
        })?;
        let mut t = Tensor::new(e.shape[0], e.shape[1], slice.to_vec())?;
        t.requires_grad = e.trainable;
        out.push((e.name, t));
    }
    Ok((manifest.meta, out))
}
