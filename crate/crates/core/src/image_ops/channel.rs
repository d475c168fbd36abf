use alloc::vec::Vec;

use super::{Normalization, ScalarMap};
use crate::numerics::{pca_project, PointMatrix};
use crate::tensor::FeatureTensor;
use crate::{Error, Result};

/// Per-pixel mean over channels.
pub fn channel_mean_map(tensor: &FeatureTensor) -> ScalarMap {
    let n = tensor.pixels();
    let mut acc = alloc::vec![0.0f64; n];
    for c in 0..tensor.channels() {
        for (a, v) in acc.iter_mut().zip(tensor.channel(c)) {
            *a += *v as f64;
        }
    }
    let inv = 1.0 / tensor.channels() as f64;
    let values = acc.into_iter().map(|a| (a * inv) as f32).collect();
    ScalarMap::from_parts(tensor.height(), tensor.width(), values, Normalization::Raw)
}

/// Per-pixel Euclidean norm over channels, z-scored.
pub fn l2_norm_map(tensor: &FeatureTensor) -> ScalarMap {
    let n = tensor.pixels();
    let mut acc = alloc::vec![0.0f64; n];
    for c in 0..tensor.channels() {
        for (a, v) in acc.iter_mut().zip(tensor.channel(c)) {
            *a += *v as f64 * *v as f64;
        }
    }
    let values = acc.into_iter().map(|a| libm::sqrt(a) as f32).collect();
    ScalarMap::from_parts(tensor.height(), tensor.width(), values, Normalization::Raw).zscore()
}

/// First-principal-component map of a tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca1Map {
    pub map: ScalarMap,
    /// All pixels share one feature vector; `map` is then uniformly 0.5.
    pub constant: bool,
}

/// Projects every pixel onto the first principal component and rescales to [0, 1].
///
/// The component is oriented so the projection correlates non-negatively with
/// [`channel_mean_map`].
pub fn pca1_map(tensor: &FeatureTensor, seed: u64) -> Result<Pca1Map> {
    let (h, w) = (tensor.height(), tensor.width());
    if h * w < 2 {
        return Err(Error::TooSmall { height: h, width: w, min: 2 });
    }
    let constant = || Pca1Map {
        map: ScalarMap::from_parts(h, w, alloc::vec![0.5; h * w], Normalization::UnitRange),
        constant: true,
    };
    let points = PointMatrix::new(h * w, tensor.channels(), tensor.to_pixel_rows())?;
    let pca = pca_project(&points, 1, seed)?;
    if pca.explained[0] <= 0.0 {
        return Ok(constant());
    }
    let mut proj: Vec<f64> = (0..h * w).map(|i| pca.scores.row(i)[0] as f64).collect();

    let mean_map = channel_mean_map(tensor);
    let mm = mean_map.values().iter().map(|v| *v as f64).sum::<f64>() / (h * w) as f64;
    let mp = proj.iter().sum::<f64>() / (h * w) as f64;
    let cov: f64 = proj.iter().zip(mean_map.values()).map(|(p, m)| (p - mp) * (*m as f64 - mm)).sum();
    if cov < 0.0 {
        proj.iter_mut().for_each(|p| *p = -*p);
    }

    let (lo, hi) =
        (proj.iter().copied().fold(f64::INFINITY, f64::min), proj.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    if lo == hi {
        return Ok(constant());
    }
    let values = proj.iter().map(|p| ((p - lo) / (hi - lo)) as f32).collect();
    Ok(Pca1Map { map: ScalarMap::from_parts(h, w, values, Normalization::UnitRange), constant: false })
}
