use alloc::vec::Vec;

use super::{sobel_components, Mask, ScalarMap};
use crate::Result;

/// Rank threshold applied to non-maximum-suppressed magnitudes.
pub const CENTERLINE_PERCENTILE: f64 = 0.90;

// Neighbour step for each quantised gradient orientation (dx, dy).
const DIRECTIONS: [(isize, isize); 4] = [(1, 0), (1, 1), (0, 1), (-1, 1)];

/// One-pixel-wide edge centerlines.
///
/// Sobel magnitude, non-maximum suppression along the gradient orientation
/// quantised to 4 bins, then a nearest-rank percentile threshold over the
/// suppressed magnitude of every pixel (zeros included); survivors at or
/// above it are kept. When fewer than a tenth of the pixels survive
/// suppression the threshold is zero and every survivor is kept. A pixel survives suppression when it is
/// strictly above its backward neighbour and not below its forward one, so a
/// two-pixel plateau thins to its first pixel.
pub fn extract_edge_centerlines(image: &ScalarMap) -> Result<Mask> {
    let (h, w) = (image.height(), image.width());
    let (gx, gy) = sobel_components(image)?;
    let mag: Vec<f64> = gx.iter().zip(&gy).map(|(a, b)| libm::sqrt(a * a + b * b)).collect();

    let at = |y: isize, x: isize| -> f64 {
        if y < 0 || x < 0 || y >= h as isize || x >= w as isize {
            0.0
        } else {
            mag[y as usize * w + x as usize]
        }
    };

    let mut suppressed = alloc::vec![0.0f64; h * w];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m <= 0.0 {
                continue;
            }
            let (dx, dy) = DIRECTIONS[orientation_bin(gx[i], gy[i])];
            let (yi, xi) = (y as isize, x as isize);
            let back = at(yi - dy, xi - dx);
            let fwd = at(yi + dy, xi + dx);
            if m > back && m >= fwd {
                suppressed[i] = m;
            }
        }
    }

    let mut ranked = suppressed.clone();
    ranked.sort_by(f64::total_cmp);
    let rank = libm::ceil(CENTERLINE_PERCENTILE * ranked.len() as f64) as usize;
    let threshold = ranked[rank.clamp(1, ranked.len()) - 1];
    Ok(Mask::new(h, w, suppressed.iter().map(|v| *v > 0.0 && *v >= threshold).collect()))
}

/// Orientation of the gradient modulo 180 degrees, in 45-degree bins.
fn orientation_bin(gx: f64, gy: f64) -> usize {
    let mut angle = libm::atan2(gy, gx).to_degrees();
    if angle < 0.0 {
        angle += 180.0;
    }
    if !(22.5..157.5).contains(&angle) {
        0
    } else if angle < 67.5 {
        1
    } else if angle < 112.5 {
        2
    } else {
        3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_image_has_no_edges() {
        let m = ScalarMap::raw(8, 8, alloc::vec![0.3; 64]).unwrap();
        assert!(extract_edge_centerlines(&m).unwrap().is_empty());
    }

    #[test]
    fn vertical_step_gives_single_column() {
        let c = 7;
        for rising in [true, false] {
            let m = ScalarMap::from_fn(12, 16, |_, x| if (x >= c) == rising { 1.0 } else { 0.0 }).unwrap();
            let e = extract_edge_centerlines(&m).unwrap();
            let cols: Vec<usize> = (0..16).filter(|&x| (0..12).any(|y| e.get(y, x))).collect();
            assert_eq!(cols.len(), 1);
            assert!(cols[0].abs_diff(c) <= 1);
            assert!((0..12).all(|y| e.get(y, cols[0])));
        }
    }

    #[test]
    fn orientation_bins() {
        assert_eq!(orientation_bin(1.0, 0.0), 0);
        assert_eq!(orientation_bin(-1.0, 0.0), 0);
        assert_eq!(orientation_bin(1.0, 1.0), 1);
        assert_eq!(orientation_bin(0.0, -1.0), 2);
        assert_eq!(orientation_bin(-1.0, 1.0), 3);
    }
}
