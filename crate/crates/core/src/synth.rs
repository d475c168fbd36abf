//! Seeded synthetic fixtures with known analytic properties.
//!
//! All randomness comes from [`SplitMix64`], so every generator is a pure
//! function of its spec.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::image_ops::{distance_transform_sq, gaussian_blur, gaussian_blur_tensor, Mask, ScalarMap};
use crate::rng::SplitMix64;
use crate::sc::partition;
use crate::tensor::{strided_extent, EncoderFeatureSet, FeatureTensor, LabelMap, STRIDES};
use crate::{Error, Result};

const MAX_SIDE: usize = 8192;
const MAX_CHANNELS: usize = 4096;

fn default_channels() -> usize {
    1
}

fn default_stride() -> u32 {
    4
}

fn default_regions() -> usize {
    8
}

fn default_edge_width() -> f64 {
    1.5
}

/// A synthetic tensor or map description. `kind` selects the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SynthSpec {
    /// `segments_y x segments_x` blocks (sized like SFC patches), each a random
    /// constant per channel, plus optional i.i.d. Gaussian noise.
    PiecewiseConstant {
        height: usize,
        width: usize,
        #[serde(default = "default_channels")]
        channels: usize,
        segments_y: usize,
        segments_x: usize,
        #[serde(default)]
        noise: f64,
        #[serde(default)]
        seed: u64,
    },
    /// +-1 squares of side `period / 2`; period 2 alternates every pixel.
    Checkerboard { height: usize, width: usize, period: usize },
    /// `cos(2 pi (freq_x x + freq_y y) + phase)`, frequencies in cycles per pixel.
    Sinusoid {
        height: usize,
        width: usize,
        freq_x: f64,
        #[serde(default)]
        freq_y: f64,
        #[serde(default)]
        phase: f64,
    },
    /// 0 left of `column`, 1 from `column` on.
    StepEdge { height: usize, width: usize, column: usize },
    /// Filled disc of value 1 on 0, centred at the map centre unless given.
    Disc {
        height: usize,
        width: usize,
        radius: f64,
        #[serde(default)]
        centre: Option<(f64, f64)>,
    },
    /// I.i.d. Gaussian values with standard deviation `amplitude`.
    Noise {
        height: usize,
        width: usize,
        #[serde(default = "default_channels")]
        channels: usize,
        amplitude: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Features that respond only near region boundaries of a seeded scene.
    EdgeStrongTensor {
        image_height: usize,
        image_width: usize,
        #[serde(default = "default_stride")]
        stride: u32,
        channels: usize,
        #[serde(default = "default_edge_width")]
        edge_width: f64,
        #[serde(default)]
        noise: f64,
        #[serde(default = "default_regions")]
        regions: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Region-constant embeddings of a seeded scene with softened borders.
    StructureStrongTensor {
        image_height: usize,
        image_width: usize,
        #[serde(default = "default_stride")]
        stride: u32,
        channels: usize,
        #[serde(default)]
        noise: f64,
        #[serde(default = "default_regions")]
        regions: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Another spec's output after a Gaussian blur of `sigma` pixels.
    BlurredVariant { base: Box<SynthSpec>, sigma: f64 },
}

/// Output of [`generate`].
#[derive(Debug, Clone, PartialEq)]
pub enum SynthOutput {
    Map(ScalarMap),
    /// A tensor and, for scene-based kinds, the full-resolution scene image.
    Tensor {
        tensor: FeatureTensor,
        image: Option<ScalarMap>,
    },
}

impl SynthOutput {
    pub fn into_map(self) -> Option<ScalarMap> {
        match self {
            SynthOutput::Map(m) => Some(m),
            SynthOutput::Tensor { .. } => None,
        }
    }

    pub fn into_tensor(self) -> Option<(FeatureTensor, Option<ScalarMap>)> {
        match self {
            SynthOutput::Tensor { tensor, image } => Some((tensor, image)),
            SynthOutput::Map(_) => None,
        }
    }
}

fn check_shape(height: usize, width: usize, channels: usize) -> Result<()> {
    if height == 0 || width == 0 || height > MAX_SIDE || width > MAX_SIDE {
        return Err(Error::BadSpec("height and width must lie in 1..=8192"));
    }
    if channels == 0 || channels > MAX_CHANNELS {
        return Err(Error::BadSpec("channels must lie in 1..=4096"));
    }
    Ok(())
}

fn check_nonneg(v: f64, what: &'static str) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::BadSpec(what))
    }
}

pub fn generate(spec: &SynthSpec) -> Result<SynthOutput> {
    match spec {
        &SynthSpec::PiecewiseConstant { height, width, channels, segments_y, segments_x, noise, seed } => {
            check_shape(height, width, channels)?;
            check_nonneg(noise, "noise must be non-negative")?;
            if segments_y == 0 || segments_x == 0 || segments_y > height || segments_x > width {
                return Err(Error::BadSpec("segment counts must lie in 1..=extent"));
            }
            let mut rng = SplitMix64::new(seed);
            let levels: Vec<f32> = (0..channels * segments_y * segments_x).map(|_| rng.next_normal() as f32).collect();
            let row_seg = segment_index(height, segments_y);
            let col_seg = segment_index(width, segments_x);
            let tensor = FeatureTensor::from_fn(channels, height, width, 4, |c, y, x| {
                let base = levels[(c * segments_y + row_seg[y]) * segments_x + col_seg[x]];
                if noise > 0.0 {
                    base + (noise * rng.next_normal()) as f32
                } else {
                    base
                }
            })?;
            Ok(SynthOutput::Tensor { tensor, image: None })
        }
        &SynthSpec::Checkerboard { height, width, period } => {
            check_shape(height, width, 1)?;
            if period < 2 || period % 2 != 0 {
                return Err(Error::BadSpec("period must be even and at least 2"));
            }
            let cell = period / 2;
            Ok(SynthOutput::Map(ScalarMap::from_fn(height, width, |y, x| {
                if (y / cell + x / cell) % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            })?))
        }
        &SynthSpec::Sinusoid { height, width, freq_x, freq_y, phase } => {
            check_shape(height, width, 1)?;
            if !(freq_x.is_finite() && freq_y.is_finite() && phase.is_finite()) {
                return Err(Error::BadSpec("frequencies and phase must be finite"));
            }
            Ok(SynthOutput::Map(ScalarMap::from_fn(height, width, |y, x| {
                libm::cos(TAU * (freq_x * x as f64 + freq_y * y as f64) + phase) as f32
            })?))
        }
        &SynthSpec::StepEdge { height, width, column } => {
            check_shape(height, width, 1)?;
            if column == 0 || column >= width {
                return Err(Error::BadSpec("step column must lie strictly inside the map"));
            }
            Ok(SynthOutput::Map(ScalarMap::from_fn(height, width, |_, x| if x >= column { 1.0 } else { 0.0 })?))
        }
        &SynthSpec::Disc { height, width, radius, centre } => {
            check_shape(height, width, 1)?;
            check_nonneg(radius, "radius must be non-negative")?;
            let (cy, cx) = centre.unwrap_or(((height as f64 - 1.0) / 2.0, (width as f64 - 1.0) / 2.0));
            Ok(SynthOutput::Map(ScalarMap::from_fn(height, width, |y, x| {
                let (dy, dx) = (y as f64 - cy, x as f64 - cx);
                if dy * dy + dx * dx <= radius * radius {
                    1.0
                } else {
                    0.0
                }
            })?))
        }
        &SynthSpec::Noise { height, width, channels, amplitude, seed } => {
            check_shape(height, width, channels)?;
            check_nonneg(amplitude, "amplitude must be non-negative")?;
            let mut rng = SplitMix64::new(seed);
            let tensor =
                FeatureTensor::from_fn(channels, height, width, 4, |_, _, _| (amplitude * rng.next_normal()) as f32)?;
            Ok(SynthOutput::Tensor { tensor, image: None })
        }
        &SynthSpec::EdgeStrongTensor {
            image_height,
            image_width,
            stride,
            channels,
            edge_width,
            noise,
            regions,
            seed,
        } => {
            let scene = scene(&SceneSpec { height: image_height, width: image_width, regions, seed })?;
            check_shape(1, 1, channels)?;
            let tensor = edge_tensor(&scene, stride, channels, edge_width, noise, seed)?;
            Ok(SynthOutput::Tensor { tensor, image: Some(scene.image) })
        }
        &SynthSpec::StructureStrongTensor { image_height, image_width, stride, channels, noise, regions, seed } => {
            let scene = scene(&SceneSpec { height: image_height, width: image_width, regions, seed })?;
            check_shape(1, 1, channels)?;
            let tensor = structure_tensor(&scene, stride, channels, noise, seed)?;
            Ok(SynthOutput::Tensor { tensor, image: Some(scene.image) })
        }
        SynthSpec::BlurredVariant { base, sigma } => {
            check_nonneg(*sigma, "sigma must be non-negative")?;
            Ok(match generate(base)? {
                SynthOutput::Map(m) => SynthOutput::Map(gaussian_blur(&m, *sigma)),
                SynthOutput::Tensor { tensor, image } => {
                    SynthOutput::Tensor { tensor: gaussian_blur_tensor(&tensor, *sigma)?, image }
                }
            })
        }
    }
}

fn segment_index(len: usize, parts: usize) -> Vec<usize> {
    let mut out = alloc::vec![0; len];
    for (i, (a, b)) in partition(len, parts).into_iter().enumerate() {
        out[a..b].iter_mut().for_each(|v| *v = i);
    }
    out
}

/// A seeded Voronoi scene: `regions` cells with distinct grey levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub height: usize,
    pub width: usize,
    pub regions: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    /// Grey levels in [0, 1].
    pub image: ScalarMap,
    /// Region ids `1..=regions`.
    pub labels: LabelMap,
    pub regions: usize,
}

pub fn scene(spec: &SceneSpec) -> Result<Scene> {
    check_shape(spec.height, spec.width, 1)?;
    if spec.regions < 2 || spec.regions > u16::MAX as usize - 1 {
        return Err(Error::BadSpec("regions must lie in 2..65535"));
    }
    let mut rng = SplitMix64::derive(spec.seed, 0x5ce4e);
    let sites: Vec<(f64, f64)> =
        (0..spec.regions).map(|_| (rng.next_f64() * spec.height as f64, rng.next_f64() * spec.width as f64)).collect();
    // Evenly spaced grey levels in shuffled order.
    let order = {
        let mut idx: Vec<usize> = (0..spec.regions).collect();
        for i in (1..idx.len()).rev() {
            let j = rng.below(i as u64 + 1) as usize;
            idx.swap(i, j);
        }
        idx
    };
    let grey: Vec<f32> = order.iter().map(|&i| (0.1 + 0.8 * i as f64 / (spec.regions - 1) as f64) as f32).collect();
    let mut ids = Vec::with_capacity(spec.height * spec.width);
    for y in 0..spec.height {
        for x in 0..spec.width {
            let (py, px) = (y as f64 + 0.5, x as f64 + 0.5);
            let mut best = (0usize, f64::INFINITY);
            for (i, (sy, sx)) in sites.iter().enumerate() {
                let d = (py - sy) * (py - sy) + (px - sx) * (px - sx);
                if d < best.1 {
                    best = (i, d);
                }
            }
            ids.push(best.0 as u16 + 1);
        }
    }
    let image = ScalarMap::raw(spec.height, spec.width, ids.iter().map(|id| grey[*id as usize - 1]).collect())?;
    Ok(Scene { image, labels: LabelMap::new(spec.height, spec.width, ids)?, regions: spec.regions })
}

fn feature_labels(scene: &Scene, stride: u32) -> Result<LabelMap> {
    if stride == 0 {
        return Err(Error::BadSpec("stride must be positive"));
    }
    let h = strided_extent(scene.labels.height(), stride);
    let w = strided_extent(scene.labels.width(), stride);
    Ok(scene.labels.resize_nearest(h, w))
}

/// Distance (feature pixels) from each feature pixel to the nearest region boundary.
fn boundary_distance(labels: &LabelMap) -> Vec<f64> {
    let (h, w) = (labels.height(), labels.width());
    let boundary = Mask::from_fn(h, w, |y, x| {
        let id = labels.get(y, x);
        (x + 1 < w && labels.get(y, x + 1) != id) || (y + 1 < h && labels.get(y + 1, x) != id)
    });
    distance_transform_sq(&boundary).into_iter().map(libm::sqrt).collect()
}

/// Edge-strong features: `a_c * (exp(-d^2 / (2 width^2)) + clutter) + noise`, `d` the
/// boundary distance and `clutter` a smooth random field (blur sigma 3) of the given amplitude.
pub fn edge_tensor(
    scene: &Scene,
    stride: u32,
    channels: usize,
    edge_width: f64,
    noise: f64,
    seed: u64,
) -> Result<FeatureTensor> {
    edge_tensor_cluttered(scene, stride, channels, edge_width, noise, 0.0, seed)
}

pub fn edge_tensor_cluttered(
    scene: &Scene,
    stride: u32,
    channels: usize,
    edge_width: f64,
    noise: f64,
    clutter: f64,
    seed: u64,
) -> Result<FeatureTensor> {
    check_nonneg(clutter, "clutter must be non-negative")?;
    if !(edge_width.is_finite() && edge_width > 0.0) {
        return Err(Error::BadSpec("edge_width must be positive"));
    }
    check_nonneg(noise, "noise must be non-negative")?;
    let labels = feature_labels(scene, stride)?;
    let dist = boundary_distance(&labels);
    let mut rng = SplitMix64::derive(seed, 0xed6e + stride as u64);
    let gains: Vec<f64> = (0..channels).map(|_| 0.5 + rng.next_f64()).collect();
    let w = labels.width();
    let mut response: Vec<f64> = dist.iter().map(|d| libm::exp(-d * d / (2.0 * edge_width * edge_width))).collect();
    if clutter > 0.0 {
        let mut crng = SplitMix64::derive(seed, 0xc1u64 << 8 | stride as u64);
        let field =
            ScalarMap::raw(labels.height(), w, (0..response.len()).map(|_| crng.next_normal() as f32).collect())?;
        let field = gaussian_blur(&field, 3.0).zscore();
        for (r, f) in response.iter_mut().zip(field.values()) {
            *r += clutter * *f as f64;
        }
    }
    FeatureTensor::from_fn(channels, labels.height(), w, stride, |c, y, x| {
        (gains[c] * response[y * w + x] + noise * rng.next_normal()) as f32
    })
}

/// Structure-strong features: one random embedding per region, blurred by one feature pixel.
pub fn structure_tensor(scene: &Scene, stride: u32, channels: usize, noise: f64, seed: u64) -> Result<FeatureTensor> {
    check_nonneg(noise, "noise must be non-negative")?;
    let labels = feature_labels(scene, stride)?;
    let mut rng = SplitMix64::derive(seed, 0x57c0);
    let embed: Vec<f64> = (0..channels * (scene.regions + 1)).map(|_| rng.next_normal()).collect();
    let mut noise_rng = SplitMix64::derive(seed, 0x57c1 + stride as u64);
    let raw = FeatureTensor::from_fn(channels, labels.height(), labels.width(), stride, |c, y, x| {
        let id = labels.get(y, x) as usize;
        (embed[id * channels + c] + noise * noise_rng.next_normal()) as f32
    })?;
    gaussian_blur_tensor(&raw, 1.0)
}

/// One stage of the synthetic edge encoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeStage {
    pub stride: u32,
    /// Response width in feature pixels.
    pub width: f64,
    /// Amplitude of independent per-pixel detail.
    pub detail: f64,
    /// Amplitude of the smooth clutter field.
    pub clutter: f64,
}

/// Stage schedule of the synthetic edge encoder: wide clean responses at the
/// fine strides, sharp responses with fine detail at stride 16, and a coarse
/// cluttered response at stride 32.
pub const EDGE_ENCODER_STAGES: [EdgeStage; 4] = [
    EdgeStage { stride: 4, width: 4.0, detail: 0.05, clutter: 0.0 },
    EdgeStage { stride: 8, width: 2.5, detail: 0.05, clutter: 0.0 },
    EdgeStage { stride: 16, width: 1.0, detail: 1.0, clutter: 0.0 },
    EdgeStage { stride: 32, width: 2.0, detail: 0.05, clutter: 1.0 },
];

/// Settings for the synthetic structure/edge encoder pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    pub scene: SceneSpec,
    pub channels: usize,
    pub structure_noise: f64,
}

impl PairSpec {
    /// Default pair on a 640x640 scene, large enough for a 20x20 SFC grid at stride 32.
    pub fn with_seed(seed: u64) -> Self {
        Self { scene: SceneSpec { height: 640, width: 640, regions: 8, seed }, channels: 8, structure_noise: 0.05 }
    }
}

pub const STRUCTURE_ENCODER_ID: &str = "synthetic-structure";
pub const EDGE_ENCODER_ID: &str = "synthetic-edge";
/// Stride where the synthetic edge encoder's EF is designed to peak.
pub const EDGE_ENCODER_PEAK_STRIDE: u32 = 16;

/// Builds the structure-leaning and edge-leaning encoders over one scene.
pub fn encoder_pair(spec: &PairSpec) -> Result<(EncoderFeatureSet, EncoderFeatureSet)> {
    let sc = scene(&spec.scene)?;
    let seed = spec.scene.seed;
    let mut structure = BTreeMap::new();
    let mut edge = BTreeMap::new();
    for stage in EDGE_ENCODER_STAGES {
        let s = stage.stride;
        structure.insert(s, structure_tensor(&sc, s, spec.channels, spec.structure_noise, seed)?);
        edge.insert(s, edge_tensor_cluttered(&sc, s, spec.channels, stage.width, stage.detail, stage.clutter, seed)?);
    }
    debug_assert!(STRIDES.iter().all(|s| edge.contains_key(s)));
    let labels = Some(sc.labels.clone());
    Ok((
        EncoderFeatureSet::new(STRUCTURE_ENCODER_ID.into(), structure, sc.image.clone(), labels.clone())?,
        EncoderFeatureSet::new(EDGE_ENCODER_ID.into(), edge, sc.image, labels)?,
    ))
}

/// Human-readable label for a spec, used in fixture file names.
pub fn spec_name(spec: &SynthSpec) -> String {
    match spec {
        SynthSpec::PiecewiseConstant { .. } => "piecewise_constant".into(),
        SynthSpec::Checkerboard { period, .. } => format!("checkerboard_p{period}"),
        SynthSpec::Sinusoid { .. } => "sinusoid".into(),
        SynthSpec::StepEdge { .. } => "step_edge".into(),
        SynthSpec::Disc { .. } => "disc".into(),
        SynthSpec::Noise { .. } => "noise".into(),
        SynthSpec::EdgeStrongTensor { stride, .. } => format!("edge_strong_s{stride}"),
        SynthSpec::StructureStrongTensor { stride, .. } => format!("structure_strong_s{stride}"),
        SynthSpec::BlurredVariant { base, .. } => format!("{}_blurred", spec_name(base)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkerboard_alternates() {
        let m = generate(&SynthSpec::Checkerboard { height: 32, width: 32, period: 2 }).unwrap().into_map().unwrap();
        for y in 0..32 {
            for x in 0..32 {
                let expected = if (x + y) % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(m.get(y, x), expected);
            }
        }
    }

    #[test]
    fn piecewise_constant_blocks() {
        let spec = SynthSpec::PiecewiseConstant {
            height: 32,
            width: 32,
            channels: 2,
            segments_y: 2,
            segments_x: 2,
            noise: 0.0,
            seed: 3,
        };
        let (t, _) = generate(&spec).unwrap().into_tensor().unwrap();
        assert_eq!(t.get(1, 0, 0), t.get(1, 15, 15));
        assert_ne!(t.get(1, 0, 0), t.get(1, 0, 16));
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }

    #[test]
    fn bad_specs() {
        assert!(generate(&SynthSpec::Checkerboard { height: 4, width: 4, period: 3 }).is_err());
        assert!(generate(&SynthSpec::StepEdge { height: 4, width: 4, column: 0 }).is_err());
        assert!(generate(&SynthSpec::Noise { height: 0, width: 4, channels: 1, amplitude: 1.0, seed: 0 }).is_err());
    }

    #[test]
    fn scene_has_all_regions() {
        let s = scene(&SceneSpec { height: 64, width: 64, regions: 5, seed: 1 }).unwrap();
        let mut seen = [false; 6];
        for id in s.labels.ids() {
            seen[*id as usize] = true;
        }
        assert!(!seen[0]);
        assert!(s.image.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
