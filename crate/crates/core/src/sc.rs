//! Structural coherence: patch contrast (SFC), cluster separability (SCS) and
//! their geometric mean (SC).

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::image_ops::{channel_mean_map, min_max};
use crate::numerics::{kmeans, pca_project, silhouette, PointMatrix};
use crate::rng::SplitMix64;
use crate::tensor::FeatureTensor;
use crate::{Error, Flag, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScParams {
    /// Patches per axis for SFC.
    pub grid_k: usize,
    /// PCA components kept before clustering.
    pub pca_dims: usize,
    /// Cluster counts whose silhouettes are pooled by the median.
    pub k_set: Vec<usize>,
    /// Maximum pixels entering k-means and the silhouette.
    pub sample_cap: usize,
    pub seed: u64,
}

impl Default for ScParams {
    fn default() -> Self {
        Self { grid_k: 16, pca_dims: 32, k_set: vec![6, 8, 10], sample_cap: 4096, seed: 0 }
    }
}

impl ScParams {
    pub fn validate(&self) -> Result<()> {
        if self.grid_k < 2 {
            return Err(Error::InvalidParams("grid_k must be at least 2"));
        }
        if self.pca_dims == 0 {
            return Err(Error::InvalidParams("pca_dims must be positive"));
        }
        let Some(&kmax) = self.k_set.iter().max() else {
            return Err(Error::InvalidParams("k_set must not be empty"));
        };
        if self.k_set.iter().any(|k| *k < 2) {
            return Err(Error::InvalidParams("every k in k_set must be at least 2"));
        }
        if self.sample_cap < kmax + 1 {
            return Err(Error::InvalidParams("sample_cap must exceed max(k_set)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScResult {
    pub sfc: f64,
    pub scs: f64,
    pub sc: f64,
    pub flags: Vec<Flag>,
}

/// Splits `len` into `parts` runs whose sizes differ by at most one, larger runs first.
pub fn partition(len: usize, parts: usize) -> Vec<(usize, usize)> {
    let (base, rem) = (len / parts, len % parts);
    let mut start = 0;
    (0..parts)
        .map(|i| {
            let size = base + usize::from(i < rem);
            let run = (start, start + size);
            start += size;
            run
        })
        .collect()
}

/// Structured feature contrast: `Var(patch means) / (Var(patch means) + Mean(patch variances))`.
///
/// Returns the score and whether the constant-map convention (score 0) applied.
pub fn sfc(tensor: &FeatureTensor, params: &ScParams) -> Result<(f64, Option<Flag>)> {
    let (h, w, k) = (tensor.height(), tensor.width(), params.grid_k);
    if h < k || w < k {
        return Err(Error::GridTooFine { grid: k, height: h, width: w });
    }
    let map = channel_mean_map(tensor);
    let (lo, hi) = min_max(map.values());
    if lo == hi {
        return Ok((0.0, Some(Flag::SfcConstant)));
    }
    let rows = partition(h, k);
    let cols = partition(w, k);
    let mut means = Vec::with_capacity(k * k);
    let mut variances = Vec::with_capacity(k * k);
    for &(y0, y1) in &rows {
        for &(x0, x1) in &cols {
            let count = ((y1 - y0) * (x1 - x0)) as f64;
            let mut sum = 0.0;
            let (mut pmin, mut pmax) = (f32::INFINITY, f32::NEG_INFINITY);
            for y in y0..y1 {
                for x in x0..x1 {
                    let v = map.get(y, x);
                    sum += v as f64;
                    pmin = pmin.min(v);
                    pmax = pmax.max(v);
                }
            }
            let mean = sum / count;
            let var = if pmin == pmax {
                0.0
            } else {
                let mut acc = 0.0;
                for y in y0..y1 {
                    for x in x0..x1 {
                        let t = map.get(y, x) as f64 - mean;
                        acc += t * t;
                    }
                }
                acc / count
            };
            means.push(if pmin == pmax { pmin as f64 } else { mean });
            variances.push(var);
        }
    }
    let inter = population_variance(&means);
    let intra = variances.iter().sum::<f64>() / variances.len() as f64;
    if inter + intra == 0.0 {
        return Ok((0.0, Some(Flag::SfcConstant)));
    }
    Ok((inter / (inter + intra), None))
}

pub(crate) fn population_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Median of a non-empty slice; even counts average the two central values.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Seed of the pixel subsample drawn before clustering.
pub fn subsample_seed(seed: u64) -> SplitMix64 {
    SplitMix64::derive(seed, 0x5ca1e)
}

/// Seed of the k-means run for cluster count `k`.
pub fn kmeans_seed(seed: u64, k: usize) -> u64 {
    SplitMix64::derive(seed, 0x6b00 + k as u64).next_u64()
}

/// Points entering k-means: PCA scores of all pixels, subsampled to `sample_cap`.
pub fn clustering_points(tensor: &FeatureTensor, params: &ScParams) -> Result<PointMatrix> {
    let n = tensor.pixels();
    if n < 2 {
        return Err(Error::TooSmall { height: tensor.height(), width: tensor.width(), min: 2 });
    }
    let points = PointMatrix::new(n, tensor.channels(), tensor.to_pixel_rows())?;
    let scores = pca_project(&points, params.pca_dims, params.seed)?.scores;
    if n > params.sample_cap {
        let keep = subsample_seed(params.seed).sample_indices(n, params.sample_cap);
        Ok(scores.select_rows(&keep))
    } else {
        Ok(scores)
    }
}

/// Structural clustering score `(median_k S_k + 1) / 2`.
///
/// Returns the score, the per-k silhouettes and the k values whose silhouette
/// was undefined (scored 0).
pub fn scs(tensor: &FeatureTensor, params: &ScParams) -> Result<(f64, Vec<f64>, Vec<Flag>)> {
    let points = clustering_points(tensor, params)?;
    let mut scores = Vec::with_capacity(params.k_set.len());
    let mut flags = Vec::new();
    let coincident = (1..points.n()).all(|i| points.row(i) == points.row(0));
    for &k in &params.k_set {
        let s = if coincident || points.n() <= k {
            None
        } else {
            let assign = kmeans(&points, k, kmeans_seed(params.seed, k));
            silhouette(&points, &assign).ok()
        };
        match s {
            Some(v) => scores.push(v),
            None => {
                flags.push(Flag::SilhouetteDegenerate { k });
                scores.push(0.0);
            }
        }
    }
    Ok(((median(&scores) + 1.0) / 2.0, scores, flags))
}

/// SFC, SCS and `SC = sqrt(SFC * SCS)`.
pub fn sc(tensor: &FeatureTensor, params: &ScParams) -> Result<ScResult> {
    params.validate()?;
    let (sfc_value, sfc_flag) = sfc(tensor, params)?;
    let (scs_value, _, mut flags) = scs(tensor, params)?;
    if let Some(f) = sfc_flag {
        flags.insert(0, f);
    }
    Ok(ScResult { sfc: sfc_value, scs: scs_value, sc: combine(sfc_value, scs_value), flags })
}

/// Geometric mean of the two structural scores.
pub fn combine(sfc: f64, scs: f64) -> f64 {
    libm::sqrt(sfc * scs)
}
