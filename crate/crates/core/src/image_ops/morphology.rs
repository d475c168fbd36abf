use alloc::vec;
use alloc::vec::Vec;

use super::Mask;
use crate::{Error, Result};

const FAR: f64 = 1e20;

/// Exact squared Euclidean distance from every pixel to the nearest set pixel
/// (separable lower-envelope transform). Empty masks yield `f64::INFINITY`.
pub fn distance_transform_sq(mask: &Mask) -> Vec<f64> {
    let (h, w) = (mask.height(), mask.width());
    let mut grid: Vec<f64> = mask.bits().iter().map(|b| if *b { 0.0 } else { FAR }).collect();
    let n = h.max(w);
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    for x in 0..w {
        for y in 0..h {
            f[y] = grid[y * w + x];
        }
        envelope(&f[..h], &mut out[..h], &mut v, &mut z);
        for y in 0..h {
            grid[y * w + x] = out[y];
        }
    }
    for y in 0..h {
        f[..w].copy_from_slice(&grid[y * w..(y + 1) * w]);
        envelope(&f[..w], &mut out[..w], &mut v, &mut z);
        grid[y * w..(y + 1) * w].copy_from_slice(&out[..w]);
    }
    grid.iter_mut().for_each(|d| {
        if *d >= FAR {
            *d = f64::INFINITY;
        }
    });
    grid
}

/// 1-D squared distance transform of sampled function `f` (Felzenszwalb-Huttenlocher).
fn envelope(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                k -= 1;
            } else {
                break;
            }
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, out) in d.iter_mut().enumerate().take(n) {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let t = q as f64 - p as f64;
        *out = (t * t + f[p]).min(FAR);
    }
}

/// Pixels within Euclidean distance `radius` of the mask.
pub fn dilate_disc(mask: &Mask, radius: u32) -> Mask {
    if radius == 0 {
        return mask.clone();
    }
    let limit = (radius as f64) * (radius as f64);
    let dist = distance_transform_sq(mask);
    Mask::new(mask.height(), mask.width(), dist.iter().map(|d| *d <= limit).collect())
}

/// Edge core `dilate(E, r_in)` and surrounding band `dilate(E, r_out) \ dilate(E, r_in)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeBands {
    pub centerlines: Mask,
    pub core: Mask,
    pub near: Mask,
    pub r_in: u32,
    pub r_out: u32,
}

pub fn make_edge_bands(centerlines: &Mask, r_in: u32, r_out: u32) -> Result<EdgeBands> {
    if r_in >= r_out {
        return Err(Error::BadRadii { r_in, r_out });
    }
    let dist = distance_transform_sq(centerlines);
    let lin = r_in as f64 * r_in as f64;
    let lout = r_out as f64 * r_out as f64;
    let core = Mask::new(centerlines.height(), centerlines.width(), dist.iter().map(|d| *d <= lin).collect());
    let near =
        Mask::new(centerlines.height(), centerlines.width(), dist.iter().map(|d| *d > lin && *d <= lout).collect());
    Ok(EdgeBands { centerlines: centerlines.clone(), core, near, r_in, r_out })
}
