use alloc::vec;
use alloc::vec::Vec;

use crate::rng::SplitMix64;

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
/// `vectors` is `dim x count`, column `j` pairs with `values[j]`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub dim: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl Eigen {
    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        let count = self.count();
        (0..self.dim).map(|i| self.vectors[i * count + j]).collect()
    }
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Full eigendecomposition of a dense symmetric `dim x dim` matrix by cyclic Jacobi rotations.
pub fn symmetric_eigen(matrix: &[f64], dim: usize) -> Eigen {
    assert_eq!(matrix.len(), dim * dim);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; dim * dim];
    for i in 0..dim {
        v[i * dim + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..dim {
            for q in p + 1..dim {
                off += a[p * dim + q] * a[p * dim + q];
            }
        }
        if off <= scale * 1e-30 || off == 0.0 {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                let apq = a[p * dim + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * dim + p];
                let aqq = a[q * dim + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = libm::copysign(1.0, theta) / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..dim {
                    let akp = a[k * dim + p];
                    let akq = a[k * dim + q];
                    a[k * dim + p] = c * akp - s * akq;
                    a[k * dim + q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = a[p * dim + k];
                    let aqk = a[q * dim + k];
                    a[p * dim + k] = c * apk - s * aqk;
                    a[q * dim + k] = s * apk + c * aqk;
                }
                for k in 0..dim {
                    let vkp = v[k * dim + p];
                    let vkq = v[k * dim + q];
                    v[k * dim + p] = c * vkp - s * vkq;
                    v[k * dim + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let diag: Vec<f64> = (0..dim).map(|i| a[i * dim + i]).collect();
    sort_pairs(dim, dim, &diag, &v, dim)
}

fn sort_pairs(dim: usize, cols: usize, values: &[f64], vectors: &[f64], keep: usize) -> Eigen {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    order.truncate(keep);
    let count = order.len();
    let mut out = vec![0.0; dim * count];
    for (jn, &jo) in order.iter().enumerate() {
        for i in 0..dim {
            out[i * count + jn] = vectors[i * cols + jo];
        }
    }
    Eigen { dim, values: order.iter().map(|&j| values[j]).collect(), vectors: out }
}

/// Largest-dimension cutoff for the direct Jacobi path.
const DIRECT_LIMIT: usize = 128;
const SUBSPACE_MAX_ITERS: usize = 500;
const SUBSPACE_OVERSAMPLE: usize = 10;

/// Leading `count` eigenpairs of a symmetric positive semi-definite matrix.
///
/// Small matrices are solved exactly by Jacobi. Larger ones use block subspace
/// iteration from a seeded Gaussian start with Rayleigh-Ritz refinement.
pub fn top_eigenpairs(matrix: &[f64], dim: usize, count: usize, seed: u64) -> Eigen {
    let count = count.min(dim);
    if dim <= DIRECT_LIMIT || count + SUBSPACE_OVERSAMPLE >= dim {
        let full = symmetric_eigen(matrix, dim);
        return sort_pairs(dim, dim, &full.values, &full.vectors, count);
    }
    let block = count + SUBSPACE_OVERSAMPLE;
    let mut rng = SplitMix64::new(seed);
    // q is dim x block, column-major for cheap column ops.
    let mut q: Vec<f64> = (0..dim * block).map(|_| rng.next_normal()).collect();
    orthonormalize(&mut q, dim, block);
    let mut prev: Vec<f64> = vec![f64::INFINITY; count];
    let mut z = vec![0.0; dim * block];
    let mut ritz = Eigen { dim, values: Vec::new(), vectors: Vec::new() };
    for _ in 0..SUBSPACE_MAX_ITERS {
        mat_cols(matrix, dim, &q, block, &mut z);
        orthonormalize(&mut z, dim, block);
        core::mem::swap(&mut q, &mut z);
        // Rayleigh-Ritz on span(q).
        mat_cols(matrix, dim, &q, block, &mut z);
        let mut small = vec![0.0; block * block];
        for a in 0..block {
            for b in a..block {
                let dot: f64 = (0..dim).map(|i| q[a * dim + i] * z[b * dim + i]).sum();
                small[a * block + b] = dot;
                small[b * block + a] = dot;
            }
        }
        let inner = symmetric_eigen(&small, block);
        let mut rotated = vec![0.0; dim * block];
        for j in 0..block {
            for a in 0..block {
                let w = inner.vectors[a * block + j];
                if w == 0.0 {
                    continue;
                }
                for i in 0..dim {
                    rotated[j * dim + i] += w * q[a * dim + i];
                }
            }
        }
        q = rotated;
        let converged = inner.values[..count]
            .iter()
            .zip(&prev)
            .all(|(v, p)| libm::fabs(v - p) <= 1e-12 * libm::fabs(inner.values[0]).max(f64::MIN_POSITIVE));
        prev.copy_from_slice(&inner.values[..count]);
        ritz.values = inner.values;
        if converged {
            break;
        }
    }
    let mut vectors = vec![0.0; dim * count];
    for j in 0..count {
        for i in 0..dim {
            vectors[i * count + j] = q[j * dim + i];
        }
    }
    ritz.values.truncate(count);
    ritz.vectors = vectors;
    ritz
}

fn mat_cols(matrix: &[f64], dim: usize, cols: &[f64], count: usize, out: &mut [f64]) {
    for j in 0..count {
        let col = &cols[j * dim..(j + 1) * dim];
        for i in 0..dim {
            let row = &matrix[i * dim..(i + 1) * dim];
            out[j * dim + i] = row.iter().zip(col).map(|(a, b)| a * b).sum();
        }
    }
}

/// Modified Gram-Schmidt on column-major `dim x count`; degenerate columns are zeroed.
fn orthonormalize(cols: &mut [f64], dim: usize, count: usize) {
    for j in 0..count {
        for _pass in 0..2 {
            for p in 0..j {
                let (head, tail) = cols.split_at_mut(j * dim);
                let prev = &head[p * dim..(p + 1) * dim];
                let cur = &mut tail[..dim];
                let dot: f64 = prev.iter().zip(cur.iter()).map(|(a, b)| a * b).sum();
                for (c, a) in cur.iter_mut().zip(prev) {
                    *c -= dot * a;
                }
            }
        }
        let cur = &mut cols[j * dim..(j + 1) * dim];
        let norm = libm::sqrt(cur.iter().map(|x| x * x).sum::<f64>());
        if norm > 1e-300 {
            cur.iter_mut().for_each(|x| *x /= norm);
        } else {
            cur.iter_mut().for_each(|x| *x = 0.0);
        }
    }
}
