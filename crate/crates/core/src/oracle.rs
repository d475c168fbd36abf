//! Slow, direct reference implementations used to check the fast paths.
//!
//! Each oracle refuses inputs above a size limit instead of running for minutes.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::image_ops::{Mask, ScalarMap};
use crate::numerics::PointMatrix;
use crate::{Error, Result};

pub const SILHOUETTE_LIMIT: usize = 2000;
pub const DFT_SIDE_LIMIT: usize = 64;
pub const DISTANCE_LIMIT: usize = 16384;
pub const KMEANS_OPTIMUM_LIMIT: usize = 10;

fn dist(points: &PointMatrix, i: usize, j: usize) -> f64 {
    let sq: f64 = points
        .row(i)
        .iter()
        .zip(points.row(j))
        .map(|(a, b)| {
            let d = *a as f64 - *b as f64;
            d * d
        })
        .sum();
    libm::sqrt(sq)
}

/// Mean silhouette by the textbook double loop. Singletons score 0.
pub fn oracle_silhouette(points: &PointMatrix, labels: &[usize]) -> Result<f64> {
    let n = points.n();
    if n > SILHOUETTE_LIMIT {
        return Err(Error::TooLarge { size: n, limit: SILHOUETTE_LIMIT });
    }
    if labels.len() != n {
        return Err(Error::LengthMismatch { left: n, right: labels.len() });
    }
    let mut clusters: Vec<usize> = labels.to_vec();
    clusters.sort_unstable();
    clusters.dedup();
    if clusters.len() < 2 {
        return Err(Error::SingleCluster);
    }
    let mut total = 0.0;
    for i in 0..n {
        let mut a = 0.0;
        let mut a_count = 0usize;
        let mut b = f64::INFINITY;
        for &c in &clusters {
            let mut sum = 0.0;
            let mut count = 0usize;
            for (j, &lj) in labels.iter().enumerate() {
                if lj == c && j != i {
                    sum += dist(points, i, j);
                    count += 1;
                }
            }
            if c == labels[i] {
                a = sum;
                a_count = count;
            } else if count > 0 && sum / (count as f64) < b {
                b = sum / count as f64;
            }
        }
        if a_count == 0 {
            continue;
        }
        let a = a / a_count as f64;
        let denom = if a > b { a } else { b };
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

/// Power `|F(u, v)|^2` of a direct double-sum DFT, row-major `(u, v)` order.
/// No window is applied.
pub fn oracle_dft_power(m: &ScalarMap) -> Result<Vec<f64>> {
    let (h, w) = (m.height(), m.width());
    let side = if h > w { h } else { w };
    if side > DFT_SIDE_LIMIT {
        return Err(Error::TooLarge { size: side, limit: DFT_SIDE_LIMIT });
    }
    let mut out = vec![0.0; h * w];
    for u in 0..h {
        for v in 0..w {
            let (mut re, mut im) = (0.0, 0.0);
            for y in 0..h {
                for x in 0..w {
                    let val = m.get(y, x) as f64;
                    let angle = -2.0 * PI * ((u * y) as f64 / h as f64 + (v * x) as f64 / w as f64);
                    re += val * libm::cos(angle);
                    im += val * libm::sin(angle);
                }
            }
            out[u * w + v] = re * re + im * im;
        }
    }
    Ok(out)
}

/// Squared Euclidean distance to the nearest set pixel by exhaustive search.
/// An empty mask gives `+inf` everywhere.
pub fn oracle_distance_transform(mask: &Mask) -> Result<Vec<f64>> {
    let (h, w) = (mask.height(), mask.width());
    if h * w > DISTANCE_LIMIT {
        return Err(Error::TooLarge { size: h * w, limit: DISTANCE_LIMIT });
    }
    let set: Vec<(usize, usize)> =
        (0..h).flat_map(|y| (0..w).map(move |x| (y, x))).filter(|&(y, x)| mask.get(y, x)).collect();
    let mut out = vec![f64::INFINITY; h * w];
    for y in 0..h {
        for x in 0..w {
            for &(sy, sx) in &set {
                let dy = y as f64 - sy as f64;
                let dx = x as f64 - sx as f64;
                let d = dy * dy + dx * dx;
                if d < out[y * w + x] {
                    out[y * w + x] = d;
                }
            }
        }
    }
    Ok(out)
}

/// Minimum within-cluster sum of squares over every labelling into exactly
/// `k` non-empty clusters. Exponential; for tiny `n` only.
pub fn oracle_kmeans_optimum(points: &PointMatrix, k: usize) -> Result<f64> {
    let n = points.n();
    if n > KMEANS_OPTIMUM_LIMIT {
        return Err(Error::TooLarge { size: n, limit: KMEANS_OPTIMUM_LIMIT });
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParams("k must lie in 1..=n"));
    }
    let d = points.d();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    let total = (k as u64).pow(n as u32);
    for code in 0..total {
        let mut c = code;
        for l in labels.iter_mut() {
            *l = (c % k as u64) as usize;
            c /= k as u64;
        }
        let mut counts = vec![0usize; k];
        let mut sums = vec![0.0f64; k * d];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for (j, v) in points.row(i).iter().enumerate() {
                sums[l * d + j] += *v as f64;
            }
        }
        if counts.contains(&0) {
            continue;
        }
        let mut cost = 0.0;
        for (i, &l) in labels.iter().enumerate() {
            for (j, v) in points.row(i).iter().enumerate() {
                let diff = *v as f64 - sums[l * d + j] / counts[l] as f64;
                cost += diff * diff;
            }
        }
        if cost < best {
            best = cost;
        }
    }
    Ok(best)
}
