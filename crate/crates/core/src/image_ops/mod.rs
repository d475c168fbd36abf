//! Classical image operations feeding the metrics.

mod channel;
mod edges;
mod morphology;
mod ncc;
mod resample;
mod sobel;
mod spectrum;

pub use channel::{channel_mean_map, l2_norm_map, pca1_map, Pca1Map};
pub use edges::{extract_edge_centerlines, CENTERLINE_PERCENTILE};
pub use morphology::{dilate_disc, distance_transform_sq, make_edge_bands, EdgeBands};
pub use ncc::{ncc_at_offset, shift_offsets, shifted_ncc};
pub use resample::{gaussian_blur, gaussian_blur_tensor, resize_bilinear};
pub use sobel::{sobel_components, sobel_gradient};
pub use spectrum::{fft_in_place, hann_power_spectrum, hann_window, Complex, PowerSpectrum};

use alloc::vec::Vec;

use crate::{Error, Result};

/// How the values of a [`ScalarMap`] have been normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    UnitRange,
    Zscore,
}

/// Single-channel `height x width` map, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMap {
    height: usize,
    width: usize,
    values: Vec<f32>,
    norm: Normalization,
}

impl ScalarMap {
    pub fn new(height: usize, width: usize, values: Vec<f32>, norm: Normalization) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidTensor("dimensions must be positive"));
        }
        if values.len() != height * width {
            return Err(Error::InvalidTensor("values length differs from H*W"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTensor("non-finite value"));
        }
        Ok(Self { height, width, values, norm })
    }

    pub fn raw(height: usize, width: usize, values: Vec<f32>) -> Result<Self> {
        Self::new(height, width, values, Normalization::Raw)
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f32) -> Result<Self> {
        let mut values = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                values.push(f(y, x));
            }
        }
        Self::raw(height, width, values)
    }

    pub(crate) fn from_parts(height: usize, width: usize, values: Vec<f32>, norm: Normalization) -> Self {
        debug_assert_eq!(values.len(), height * width);
        Self { height, width, values, norm }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn normalization(&self) -> Normalization {
        self.norm
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> f32 {
        self.values[y * self.width + x]
    }

    /// Returns a copy with every value mapped through `f` (tag reset to raw).
    pub fn map(&self, f: impl Fn(f32) -> f32) -> ScalarMap {
        ScalarMap::from_parts(self.height, self.width, self.values.iter().map(|v| f(*v)).collect(), Normalization::Raw)
    }

    /// Z-score with population standard deviation; a constant map becomes all zeros.
    pub fn zscore(&self) -> ScalarMap {
        ScalarMap::from_parts(self.height, self.width, zscore_values(&self.values), Normalization::Zscore)
    }

    /// Min-max scaling to [0, 1]; `None` when the map is constant.
    pub fn unit_range(&self) -> Option<ScalarMap> {
        let (lo, hi) = min_max(&self.values);
        if lo == hi {
            return None;
        }
        let span = hi as f64 - lo as f64;
        let values = self.values.iter().map(|v| ((*v as f64 - lo as f64) / span) as f32).collect();
        Some(ScalarMap::from_parts(self.height, self.width, values, Normalization::UnitRange))
    }
}

pub(crate) fn min_max(values: &[f32]) -> (f32, f32) {
    values.iter().fold((f32::INFINITY, f32::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)))
}

fn zscore_values(values: &[f32]) -> Vec<f32> {
    let (lo, hi) = min_max(values);
    if lo == hi {
        return alloc::vec![0.0; values.len()];
    }
    let n = values.len() as f64;
    let mean = values.iter().map(|v| *v as f64).sum::<f64>() / n;
    let var = values.iter().map(|v| (*v as f64 - mean) * (*v as f64 - mean)).sum::<f64>() / n;
    let std = libm::sqrt(var);
    values.iter().map(|v| ((*v as f64 - mean) / std) as f32).collect()
}

/// Binary `height x width` mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), height * width, "mask length differs from H*W");
        Self { height, width, bits }
    }

    pub fn empty(height: usize, width: usize) -> Self {
        Self::new(height, width, alloc::vec![false; height * width])
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(y, x));
            }
        }
        Self::new(height, width, bits)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, y: usize, x: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| !*a || *b)
    }

    pub fn intersects(&self, other: &Mask) -> bool {
        self.bits.iter().zip(&other.bits).any(|(a, b)| *a && *b)
    }

    /// `self \ other`.
    pub fn difference(&self, other: &Mask) -> Mask {
        Mask::new(self.height, self.width, self.bits.iter().zip(&other.bits).map(|(a, b)| *a && !*b).collect())
    }

    pub fn union(&self, other: &Mask) -> Mask {
        Mask::new(self.height, self.width, self.bits.iter().zip(&other.bits).map(|(a, b)| *a || *b).collect())
    }
}
