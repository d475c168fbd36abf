use alloc::vec::Vec;

use super::{Normalization, ScalarMap};
use crate::{Error, Result};

/// Horizontal and vertical 3x3 Sobel responses with replicate borders.
pub fn sobel_components(m: &ScalarMap) -> Result<(Vec<f64>, Vec<f64>)> {
    let (h, w) = (m.height(), m.width());
    if h < 3 || w < 3 {
        return Err(Error::TooSmall { height: h, width: w, min: 3 });
    }
    let at = |y: isize, x: isize| -> f64 {
        let yy = y.clamp(0, h as isize - 1) as usize;
        let xx = x.clamp(0, w as isize - 1) as usize;
        m.get(yy, xx) as f64
    };
    let mut gx = Vec::with_capacity(h * w);
    let mut gy = Vec::with_capacity(h * w);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let (tl, tc, tr) = (at(y - 1, x - 1), at(y - 1, x), at(y - 1, x + 1));
            let (ml, mr) = (at(y, x - 1), at(y, x + 1));
            let (bl, bc, br) = (at(y + 1, x - 1), at(y + 1, x), at(y + 1, x + 1));
            gx.push((tr + 2.0 * mr + br) - (tl + 2.0 * ml + bl));
            gy.push((bl + 2.0 * bc + br) - (tl + 2.0 * tc + tr));
        }
    }
    Ok((gx, gy))
}

/// Sobel gradient magnitude `sqrt(gx^2 + gy^2)`.
pub fn sobel_gradient(m: &ScalarMap) -> Result<ScalarMap> {
    let (gx, gy) = sobel_components(m)?;
    let values = gx.iter().zip(&gy).map(|(a, b)| libm::sqrt(a * a + b * b) as f32).collect();
    Ok(ScalarMap::from_parts(m.height(), m.width(), values, Normalization::Raw))
}
