use alloc::vec;
use alloc::vec::Vec;

use super::{linalg::top_eigenpairs, PointMatrix};
use crate::{Error, Result};

/// Result of [`pca_project`].
#[derive(Debug, Clone)]
pub struct Pca {
    /// `n x d'` projected scores.
    pub scores: PointMatrix,
    /// Variance along each retained component (sample covariance, `n - 1` divisor).
    pub explained: Vec<f64>,
    /// `d x d'` component vectors, row-major.
    pub components: Vec<f64>,
    /// Column means removed before projection.
    pub mean: Vec<f64>,
}

impl Pca {
    pub fn component(&self, j: usize) -> Vec<f64> {
        let k = self.explained.len();
        (0..self.mean.len()).map(|i| self.components[i * k + j]).collect()
    }
}

/// Projects mean-centred points onto their leading principal components.
///
/// Keeps `min(n_components, d, n - 1)` components ordered by descending
/// variance. Each component is signed so that its largest-magnitude entry is
/// positive (first such entry on ties). `seed` only matters for wide inputs,
/// where the leading eigenvectors are found by seeded subspace iteration.
pub fn pca_project(points: &PointMatrix, n_components: usize, seed: u64) -> Result<Pca> {
    let (n, d) = (points.n(), points.d());
    if n < 2 {
        return Err(Error::DegenerateInput("PCA needs at least two samples"));
    }
    if n_components == 0 {
        return Err(Error::InvalidParams("n_components must be positive"));
    }
    let keep = n_components.min(d).min(n - 1);

    let mut mean = vec![0.0f64; d];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(points.row(i)) {
            *m += *v as f64;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut cov = vec![0.0f64; d * d];
    let mut centred = vec![0.0f64; d];
    for i in 0..n {
        for ((c, v), m) in centred.iter_mut().zip(points.row(i)).zip(&mean) {
            *c = *v as f64 - m;
        }
        for a in 0..d {
            let ca = centred[a];
            if ca == 0.0 {
                continue;
            }
            let row = &mut cov[a * d..a * d + d];
            for b in a..d {
                row[b] += ca * centred[b];
            }
        }
    }
    let denom = (n - 1) as f64;
    for a in 0..d {
        for b in a..d {
            let v = cov[a * d + b] / denom;
            cov[a * d + b] = v;
            cov[b * d + a] = v;
        }
    }

    let eig = top_eigenpairs(&cov, d, keep, seed);
    let mut components = vec![0.0f64; d * keep];
    for j in 0..keep {
        let mut v = eig.vector(j);
        let mut best = 0usize;
        for i in 1..d {
            if libm::fabs(v[i]) > libm::fabs(v[best]) {
                best = i;
            }
        }
        if v[best] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        for i in 0..d {
            components[i * keep + j] = v[i];
        }
    }

    let mut scores = Vec::with_capacity(n * keep);
    for i in 0..n {
        for ((c, v), m) in centred.iter_mut().zip(points.row(i)).zip(&mean) {
            *c = *v as f64 - m;
        }
        for j in 0..keep {
            let mut s = 0.0;
            for a in 0..d {
                s += centred[a] * components[a * keep + j];
            }
            scores.push(s as f32);
        }
    }
    let explained = eig.values.iter().map(|v| v.max(0.0)).collect();
    Ok(Pca { scores: PointMatrix::new(n, keep, scores)?, explained, components, mean })
}
