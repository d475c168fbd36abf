//! In-memory feature tensors, label maps and per-encoder stride collections.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::image_ops::ScalarMap;
use crate::{Error, Result};

/// Output strides of the feature pyramid.
pub const STRIDES: [u32; 4] = [4, 8, 16, 32];

/// One encoder stage: `channels x height x width`, channel-major then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    channels: usize,
    height: usize,
    width: usize,
    stride: u32,
    data: Vec<f32>,
}

impl FeatureTensor {
    pub fn new(channels: usize, height: usize, width: usize, stride: u32, data: Vec<f32>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::InvalidTensor("dimensions must be positive"));
        }
        if data.len() != channels * height * width {
            return Err(Error::InvalidTensor("data length differs from C*H*W"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTensor("non-finite value"));
        }
        Ok(Self { channels, height, width, stride, data })
    }

    /// Builds a tensor from a per-pixel closure `f(channel, row, col)`.
    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        stride: u32,
        mut f: impl FnMut(usize, usize, usize) -> f32,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Self::new(channels, height, width, stride, data)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn stride(&self) -> u32 {
        self.stride
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    /// The `height x width` plane of one channel.
    pub fn channel(&self, c: usize) -> &[f32] {
        let n = self.pixels();
        &self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn with_stride(mut self, stride: u32) -> Self {
        self.stride = stride;
        self
    }

    /// Pixel-major copy: row `p` holds the `channels` values of pixel `p`.
    pub fn to_pixel_rows(&self) -> Vec<f32> {
        let n = self.pixels();
        let mut out = alloc::vec![0.0f32; n * self.channels];
        for c in 0..self.channels {
            for (p, v) in self.channel(c).iter().enumerate() {
                out[p * self.channels + c] = *v;
            }
        }
        out
    }
}

/// Dense per-pixel segment ids; id 0 means "ignore".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    height: usize,
    width: usize,
    ids: Vec<u16>,
}

impl LabelMap {
    pub const IGNORE: u16 = 0;

    pub fn new(height: usize, width: usize, ids: Vec<u16>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidTensor("dimensions must be positive"));
        }
        if ids.len() != height * width {
            return Err(Error::InvalidTensor("ids length differs from H*W"));
        }
        Ok(Self { height, width, ids })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn ids(&self) -> &[u16] {
        &self.ids
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> u16 {
        self.ids[y * self.width + x]
    }

    /// Nearest-neighbour resampling onto a `height x width` grid using pixel centres.
    pub fn resize_nearest(&self, height: usize, width: usize) -> LabelMap {
        let mut ids = Vec::with_capacity(height * width);
        for y in 0..height {
            let sy = nearest_source(y, height, self.height);
            for x in 0..width {
                let sx = nearest_source(x, width, self.width);
                ids.push(self.get(sy, sx));
            }
        }
        LabelMap { height, width, ids }
    }
}

fn nearest_source(dst: usize, dst_len: usize, src_len: usize) -> usize {
    let pos = (dst as f64 + 0.5) * src_len as f64 / dst_len as f64;
    (libm::floor(pos) as usize).min(src_len - 1)
}

/// Expected feature extent along one axis for a given image extent and stride.
pub fn strided_extent(image_extent: usize, stride: u32) -> usize {
    image_extent.div_ceil(stride as usize)
}

/// All pyramid stages of one encoder for one image.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderFeatureSet {
    pub encoder_id: String,
    pub tensors: BTreeMap<u32, FeatureTensor>,
    pub image: ScalarMap,
    pub label_map: Option<LabelMap>,
}

impl EncoderFeatureSet {
    /// Validates stride coverage and the `ceil(extent / stride) +- 1` shape rule.
    pub fn new(
        encoder_id: String,
        tensors: BTreeMap<u32, FeatureTensor>,
        image: ScalarMap,
        label_map: Option<LabelMap>,
    ) -> Result<Self> {
        for s in STRIDES {
            let t = tensors.get(&s).ok_or(Error::MissingStride(s))?;
            let expected = (strided_extent(image.height(), s), strided_extent(image.width(), s));
            let actual = (t.height(), t.width());
            if expected.0.abs_diff(actual.0) > 1 || expected.1.abs_diff(actual.1) > 1 {
                return Err(Error::ShapeMismatch { expected, actual }.at_stride(s));
            }
        }
        if let Some(labels) = &label_map {
            let expected = (image.height(), image.width());
            let actual = (labels.height(), labels.width());
            if expected != actual {
                return Err(Error::ShapeMismatch { expected, actual });
            }
        }
        Ok(Self { encoder_id, tensors, image, label_map })
    }

    pub fn tensor(&self, stride: u32) -> Result<&FeatureTensor> {
        self.tensors.get(&stride).ok_or(Error::MissingStride(stride))
    }
}
