use alloc::vec;

use super::{sq_dist, ClusterAssignment, PointMatrix};
use crate::{Error, Result};

/// Mean silhouette coefficient under Euclidean distance.
///
/// Members of singleton clusters score 0, as do points whose intra and
/// nearest-other distances are both zero.
pub fn silhouette(points: &PointMatrix, assign: &ClusterAssignment) -> Result<f64> {
    let n = points.n();
    if n < 2 {
        return Err(Error::DegenerateInput("silhouette needs at least two samples"));
    }
    if assign.labels.len() != n {
        return Err(Error::LengthMismatch { left: assign.labels.len(), right: n });
    }
    let k = assign.k;
    let mut sizes = vec![0usize; k];
    for &l in &assign.labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|s| **s > 0).count() < 2 {
        return Err(Error::SingleCluster);
    }

    // sums[i * k + c] = total distance from point i to members of cluster c.
    let mut sums = vec![0.0f64; n * k];
    for i in 0..n {
        let ri = points.row(i);
        let li = assign.labels[i];
        for j in i + 1..n {
            let dist = libm::sqrt(sq_dist(ri, points.row(j)));
            sums[i * k + assign.labels[j]] += dist;
            sums[j * k + li] += dist;
        }
    }

    let mut total = 0.0;
    for i in 0..n {
        let own = assign.labels[i];
        if sizes[own] < 2 {
            continue;
        }
        let a = sums[i * k + own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[i * k + c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn tight_far_clusters_near_one() {
        let mut data = Vec::new();
        for i in 0..5 {
            let t = i as f32 * 0.02;
            data.extend([t, -t]);
        }
        for i in 0..5 {
            let t = i as f32 * 0.02;
            data.extend([100.0 + t, 100.0 - t]);
        }
        let pts = PointMatrix::new(10, 2, data).unwrap();
        let labels = (0..10).map(|i| i / 5).collect();
        let s = silhouette(&pts, &ClusterAssignment::from_labels(labels, 2)).unwrap();
        assert!(s > 0.99, "{s}");
    }

    #[test]
    fn one_cluster_errors() {
        let pts = PointMatrix::new(3, 1, vec![0.0, 1.0, 2.0]).unwrap();
        let a = ClusterAssignment::from_labels(vec![1, 1, 1], 2);
        assert_eq!(silhouette(&pts, &a), Err(Error::SingleCluster));
    }

    #[test]
    fn two_singletons_score_zero() {
        let pts = PointMatrix::new(2, 1, vec![0.0, 1.0]).unwrap();
        let a = ClusterAssignment::from_labels(vec![0, 1], 2);
        assert_eq!(silhouette(&pts, &a).unwrap(), 0.0);
    }
}
