//! Deterministic linear algebra and statistics used by the metrics.

mod kmeans;
mod linalg;
mod pca;
mod silhouette;
mod spearman;

pub use kmeans::{inertia, kmeans, kmeans_traced, ClusterAssignment, KMEANS_MAX_ITERS, KMEANS_TOL};
pub use linalg::{symmetric_eigen, top_eigenpairs, Eigen};
pub use pca::{pca_project, Pca};
pub use silhouette::silhouette;
pub use spearman::{average_ranks, pearson, spearman};

use alloc::vec::Vec;

use crate::{Error, Result};

/// `n x d` samples, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMatrix {
    n: usize,
    d: usize,
    data: Vec<f32>,
}

impl PointMatrix {
    pub fn new(n: usize, d: usize, data: Vec<f32>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::DegenerateInput("point matrix needs n >= 1 and d >= 1"));
        }
        if data.len() != n * d {
            return Err(Error::LengthMismatch { left: data.len(), right: n * d });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTensor("non-finite value"));
        }
        Ok(Self { n, d, data })
    }

    pub fn from_rows(rows: &[&[f32]]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.len() != d {
                return Err(Error::LengthMismatch { left: r.len(), right: d });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), d, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    /// Rows at the given indices, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> PointMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        PointMatrix { n: indices.len(), d: self.d, data }
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = *x as f64 - *y as f64;
            t * t
        })
        .sum()
}

#[inline]
pub(crate) fn sq_dist_f64(a: &[f32], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = *x as f64 - y;
            t * t
        })
        .sum()
}
