//! Per-image encoder manifests: one JSON file naming the image, optional
//! labels and the FTEN file of every pyramid stage.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use feature_probe_core::image_ops::ScalarMap;
use feature_probe_core::{EncoderFeatureSet, LabelMap, STRIDES};

use crate::error::{ProbeError, Result};
use crate::ften::{self, Payload};
use crate::pgm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage {
    pub stride: u32,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub encoder_id: String,
    pub image: PathBuf,
    #[serde(default)]
    pub label_map: Option<PathBuf>,
    pub stages: Vec<Stage>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| ProbeError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| ProbeError::BadManifest { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|e| ProbeError::IoFailure { path: path.to_path_buf(), source: e })
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn is_pgm(path: &Path) -> Result<bool> {
    use std::io::Read;
    let mut magic = [0u8; 2];
    let mut f = fs::File::open(path).map_err(|e| ProbeError::io(path, e))?;
    Ok(f.read(&mut magic).map_err(|e| ProbeError::io(path, e))? == 2 && &magic == b"P5")
}

/// Loads a grayscale image in [0, 1] from PGM or FTEN.
///
/// Integer samples are divided by their type maximum (the PGM maxval). A
/// three-channel FTEN image is reduced with luma weights 0.299/0.587/0.114.
pub fn load_image(path: &Path) -> Result<ScalarMap> {
    let bad = |message: &str| ProbeError::BadFile { path: path.to_path_buf(), message: message.into() };
    if is_pgm(path)? {
        let p = pgm::read(path)?;
        let scale = p.maxval as f32;
        return Ok(ScalarMap::raw(p.height, p.width, p.samples.iter().map(|v| *v as f32 / scale).collect())?);
    }
    let (h, payload) = ften::read_file(path)?;
    let (height, width) = (h.height as usize, h.width as usize);
    let values = match payload {
        Payload::F32(v) => v,
        Payload::U16(v) => v.iter().map(|x| *x as f32 / 65535.0).collect(),
        Payload::U8(v) => v.iter().map(|x| *x as f32 / 255.0).collect(),
    };
    let plane = height * width;
    let gray: Vec<f32> = match h.channels {
        1 => values,
        3 => (0..plane)
            .map(|i| {
                (0.299 * values[i] as f64 + 0.587 * values[plane + i] as f64 + 0.114 * values[2 * plane + i] as f64)
                    as f32
            })
            .collect(),
        _ => return Err(bad("images need one or three channels")),
    };
    if gray.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(bad("image intensities must lie in [0, 1]"));
    }
    Ok(ScalarMap::raw(height, width, gray)?)
}

/// Loads segment ids from a single-channel FTEN (u16/u8) file or a PGM.
pub fn load_label_map(path: &Path) -> Result<LabelMap> {
    if is_pgm(path)? {
        let p = pgm::read(path)?;
        return Ok(LabelMap::new(p.height, p.width, p.samples)?);
    }
    ften::read_label_map(path)
}

/// Reads a manifest and everything it references, resolving relative paths
/// against the manifest's directory.
pub fn load_manifest(path: &Path) -> Result<EncoderFeatureSet> {
    let manifest = Manifest::read(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let bad = |message: String| ProbeError::BadManifest { path: path.to_path_buf(), message };
    let mut tensors = BTreeMap::new();
    for stage in &manifest.stages {
        if !STRIDES.contains(&stage.stride) {
            return Err(bad(format!("stride {} is not one of 4, 8, 16, 32", stage.stride)));
        }
        let tensor = ften::read_feature_tensor(&resolve(base, &stage.path))?;
        if tensor.stride() != stage.stride {
            return Err(bad(format!("stage {} points at a file with stride {}", stage.stride, tensor.stride())));
        }
        if tensors.insert(stage.stride, tensor).is_some() {
            return Err(bad(format!("stride {} listed twice", stage.stride)));
        }
    }
    let image = load_image(&resolve(base, &manifest.image))?;
    let labels = manifest.label_map.as_ref().map(|p| load_label_map(&resolve(base, p))).transpose()?;
    Ok(EncoderFeatureSet::new(manifest.encoder_id, tensors, image, labels)?)
}
