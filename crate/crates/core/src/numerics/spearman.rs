use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// 1-based ranks with ties sharing the average of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::DegenerateInput("correlation needs at least two pairs"));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Spearman rank correlation: Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_reversal() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman(&x, &x).unwrap(), 1.0);
        let y = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(spearman(&x, &y).unwrap(), -1.0);
    }

    #[test]
    fn tied_ranks_by_hand() {
        // x ranks: 1, 2.5, 2.5, 4 ; y ranks: 1, 3, 2, 4
        // centred: x (-1.5, 0, 0, 1.5), y (-1.5, 0.5, -0.5, 1.5)
        // sxy = 4.5, sxx = 4.5, syy = 5 -> 4.5 / sqrt(22.5)
        let r = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 4.5 / libm::sqrt(22.5)).abs() < 1e-15);
        assert_eq!(average_ranks(&[1.0, 2.0, 2.0, 3.0]), vec![1.0, 2.5, 2.5, 4.0]);
    }

    #[test]
    fn errors() {
        assert!(matches!(spearman(&[1.0, 2.0], &[1.0]), Err(Error::LengthMismatch { .. })));
        assert_eq!(spearman(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::ZeroVariance));
    }
}
