use alloc::vec::Vec;

use super::{Normalization, ScalarMap};
use crate::tensor::FeatureTensor;
use crate::Result;

/// Bilinear resize with pixel-centre alignment and clamped borders.
pub fn resize_bilinear(m: &ScalarMap, height: usize, width: usize) -> ScalarMap {
    let (sh, sw) = (m.height(), m.width());
    let taps = |dst: usize, dst_len: usize, src_len: usize| -> (usize, usize, f64) {
        let pos = ((dst as f64 + 0.5) * src_len as f64 / dst_len as f64 - 0.5).clamp(0.0, (src_len - 1) as f64);
        let lo = libm::floor(pos) as usize;
        let hi = (lo + 1).min(src_len - 1);
        (lo, hi, pos - lo as f64)
    };
    let cols: Vec<_> = (0..width).map(|x| taps(x, width, sw)).collect();
    let mut values = Vec::with_capacity(height * width);
    for y in 0..height {
        let (y0, y1, fy) = taps(y, height, sh);
        for &(x0, x1, fx) in &cols {
            let top = m.get(y0, x0) as f64 * (1.0 - fx) + m.get(y0, x1) as f64 * fx;
            let bottom = m.get(y1, x0) as f64 * (1.0 - fx) + m.get(y1, x1) as f64 * fx;
            values.push((top * (1.0 - fy) + bottom * fy) as f32);
        }
    }
    ScalarMap::from_parts(height, width, values, Normalization::Raw)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = libm::ceil(3.0 * sigma) as isize;
    let mut k: Vec<f64> = (-radius..=radius).map(|i| libm::exp(-((i * i) as f64) / (2.0 * sigma * sigma))).collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    k
}

fn blur_plane(values: &[f32], h: usize, w: usize, kernel: &[f64]) -> Vec<f32> {
    let radius = (kernel.len() / 2) as isize;
    let mut tmp = alloc::vec![0.0f64; h * w];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kv) in kernel.iter().enumerate() {
                let xx = (x as isize + i as isize - radius).clamp(0, w as isize - 1) as usize;
                acc += kv * values[y * w + xx] as f64;
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = Vec::with_capacity(h * w);
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, kv) in kernel.iter().enumerate() {
                let yy = (y as isize + i as isize - radius).clamp(0, h as isize - 1) as usize;
                acc += kv * tmp[yy * w + x];
            }
            out.push(acc as f32);
        }
    }
    out
}

/// Separable Gaussian blur (kernel radius `ceil(3 sigma)`, replicate borders).
/// `sigma <= 0` returns the input unchanged.
pub fn gaussian_blur(m: &ScalarMap, sigma: f64) -> ScalarMap {
    if sigma <= 0.0 {
        return m.clone();
    }
    let values = blur_plane(m.values(), m.height(), m.width(), &gaussian_kernel(sigma));
    ScalarMap::from_parts(m.height(), m.width(), values, Normalization::Raw)
}

/// [`gaussian_blur`] applied to every channel.
pub fn gaussian_blur_tensor(t: &FeatureTensor, sigma: f64) -> Result<FeatureTensor> {
    if sigma <= 0.0 {
        return Ok(t.clone());
    }
    let kernel = gaussian_kernel(sigma);
    let mut data = Vec::with_capacity(t.data().len());
    for c in 0..t.channels() {
        data.extend(blur_plane(t.channel(c), t.height(), t.width(), &kernel));
    }
    FeatureTensor::new(t.channels(), t.height(), t.width(), t.stride(), data)
}
