use alloc::vec;
use alloc::vec::Vec;

use super::{sq_dist_f64, PointMatrix};
use crate::rng::SplitMix64;

pub const KMEANS_MAX_ITERS: usize = 100;
/// Lloyd iterations stop once no centroid moves farther than this.
pub const KMEANS_TOL: f64 = 1e-6;

/// Hard cluster labels plus the fitted centroids.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
    /// `k x d` row-major centroids (empty clusters keep their last position).
    pub centroids: Vec<f64>,
    /// `true` for clusters with no members.
    pub empty: Vec<bool>,
}

impl ClusterAssignment {
    /// Builds an assignment from labels alone; centroids are left empty.
    pub fn from_labels(labels: Vec<usize>, k: usize) -> Self {
        let mut empty = vec![true; k];
        for &l in &labels {
            assert!(l < k, "label {l} out of range for k = {k}");
            empty[l] = false;
        }
        Self { labels, k, centroids: Vec::new(), empty }
    }

    pub fn non_empty(&self) -> usize {
        self.empty.iter().filter(|e| !**e).count()
    }
}

/// Seeded k-means++ initialisation followed by Lloyd iterations.
pub fn kmeans(points: &PointMatrix, k: usize, seed: u64) -> ClusterAssignment {
    kmeans_traced(points, k, seed, |_| {})
}

/// [`kmeans`] with a hook receiving the inertia after every centroid update.
pub fn kmeans_traced(points: &PointMatrix, k: usize, seed: u64, mut trace: impl FnMut(f64)) -> ClusterAssignment {
    assert!(k >= 1, "k must be positive");
    let (n, d) = (points.n(), points.d());
    if n <= k {
        let mut centroids = vec![0.0; k * d];
        for i in 0..n {
            for (c, v) in centroids[i * d..(i + 1) * d].iter_mut().zip(points.row(i)) {
                *c = *v as f64;
            }
        }
        let mut out = ClusterAssignment::from_labels((0..n).collect(), k);
        out.centroids = centroids;
        return out;
    }

    let mut rng = SplitMix64::new(seed);
    let mut centroids = plus_plus_init(points, k, &mut rng);
    let mut labels = vec![0usize; n];
    let mut counts = vec![0usize; k];
    for _ in 0..KMEANS_MAX_ITERS {
        assign(points, &centroids, k, &mut labels);
        repair_empty(points, &mut centroids, k, &mut labels, &mut counts);

        let mut next = vec![0.0; k * d];
        counts.iter_mut().for_each(|c| *c = 0);
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for (c, v) in next[l * d..(l + 1) * d].iter_mut().zip(points.row(i)) {
                *c += *v as f64;
            }
        }
        let mut moved = 0.0f64;
        for c in 0..k {
            let row = &mut next[c * d..(c + 1) * d];
            if counts[c] == 0 {
                row.copy_from_slice(&centroids[c * d..(c + 1) * d]);
                continue;
            }
            row.iter_mut().for_each(|v| *v /= counts[c] as f64);
            let shift: f64 = row.iter().zip(&centroids[c * d..(c + 1) * d]).map(|(a, b)| (a - b) * (a - b)).sum();
            moved = moved.max(libm::sqrt(shift));
        }
        centroids = next;
        trace(inertia_with(points, &labels, &centroids));
        if moved < KMEANS_TOL {
            break;
        }
    }
    assign(points, &centroids, k, &mut labels);
    repair_empty(points, &mut centroids, k, &mut labels, &mut counts);
    let mut out = ClusterAssignment::from_labels(labels, k);
    out.centroids = centroids;
    out
}

/// D^2 sampling of one point index; uniform when every weight is zero.
fn d2_sample(nearest: &[f64], rng: &mut SplitMix64) -> usize {
    let n = nearest.len();
    let total: f64 = nearest.iter().sum();
    if total <= 0.0 {
        return rng.below(n as u64) as usize;
    }
    let target = rng.next_f64() * total;
    let mut acc = 0.0;
    for (i, w) in nearest.iter().enumerate() {
        acc += w;
        if acc > target && *w > 0.0 {
            return i;
        }
    }
    n - 1
}

/// Greedy k-means++: each new centre is the best of `2 + ln k` D^2-sampled
/// candidates, judged by the resulting potential.
fn plus_plus_init(points: &PointMatrix, k: usize, rng: &mut SplitMix64) -> Vec<f64> {
    let (n, d) = (points.n(), points.d());
    let trials = 2 + libm::log(k as f64) as usize;
    let mut centroids = Vec::with_capacity(k * d);
    let first = rng.below(n as u64) as usize;
    centroids.extend(points.row(first).iter().map(|v| *v as f64));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist_f64(points.row(i), &centroids[..d])).collect();
    let mut scratch = vec![0.0f64; n];
    let mut best_nearest = vec![0.0f64; n];
    for _ in 1..k {
        let mut best = (usize::MAX, f64::INFINITY);
        for _ in 0..trials {
            let candidate = d2_sample(&nearest, rng);
            let centre: Vec<f64> = points.row(candidate).iter().map(|v| *v as f64).collect();
            let mut potential = 0.0;
            for (i, (s, w)) in scratch.iter_mut().zip(&nearest).enumerate() {
                *s = w.min(sq_dist_f64(points.row(i), &centre));
                potential += *s;
            }
            if potential < best.1 {
                best = (candidate, potential);
                best_nearest.copy_from_slice(&scratch);
            }
        }
        centroids.extend(points.row(best.0).iter().map(|v| *v as f64));
        nearest.copy_from_slice(&best_nearest);
    }
    centroids
}

fn assign(points: &PointMatrix, centroids: &[f64], k: usize, labels: &mut [usize]) {
    let d = points.d();
    for (i, label) in labels.iter_mut().enumerate() {
        let row = points.row(i);
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for c in 0..k {
            let dist = sq_dist_f64(row, &centroids[c * d..(c + 1) * d]);
            if dist < best_d {
                best_d = dist;
                best = c;
            }
        }
        *label = best;
    }
}

/// Gives every empty cluster the point currently farthest from its own centroid.
fn repair_empty(points: &PointMatrix, centroids: &mut [f64], k: usize, labels: &mut [usize], counts: &mut [usize]) {
    let d = points.d();
    counts.iter_mut().for_each(|c| *c = 0);
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for c in 0..k {
        if counts[c] != 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = -1.0;
        for (i, &l) in labels.iter().enumerate() {
            if counts[l] < 2 {
                continue;
            }
            let dist = sq_dist_f64(points.row(i), &centroids[l * d..(l + 1) * d]);
            if dist > far_d {
                far_d = dist;
                far = Some(i);
            }
        }
        let Some(i) = far else { break };
        counts[labels[i]] -= 1;
        labels[i] = c;
        counts[c] = 1;
        for (dst, v) in centroids[c * d..(c + 1) * d].iter_mut().zip(points.row(i)) {
            *dst = *v as f64;
        }
    }
}

fn inertia_with(points: &PointMatrix, labels: &[usize], centroids: &[f64]) -> f64 {
    let d = points.d();
    labels.iter().enumerate().map(|(i, &l)| sq_dist_f64(points.row(i), &centroids[l * d..(l + 1) * d])).sum()
}

/// Sum of squared distances from each point to the mean of its cluster.
pub fn inertia(points: &PointMatrix, assign: &ClusterAssignment) -> f64 {
    let d = points.d();
    let mut sums = vec![0.0; assign.k * d];
    let mut counts = vec![0usize; assign.k];
    for (i, &l) in assign.labels.iter().enumerate() {
        counts[l] += 1;
        for (s, v) in sums[l * d..(l + 1) * d].iter_mut().zip(points.row(i)) {
            *s += *v as f64;
        }
    }
    for c in 0..assign.k {
        if counts[c] > 0 {
            sums[c * d..(c + 1) * d].iter_mut().for_each(|s| *s /= counts[c] as f64);
        }
    }
    inertia_with(points, &assign.labels, &sums)
}
