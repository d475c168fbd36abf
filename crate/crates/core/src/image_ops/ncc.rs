use super::ScalarMap;
use crate::{Error, Result};

/// The eight integer shifts `(dx, dy)` of length about `r`:
/// axis shifts by `r` and diagonal shifts by `round(r / sqrt 2)` per axis.
pub fn shift_offsets(r: usize) -> [(isize, isize); 8] {
    let r = r as isize;
    let d = libm::round(r as f64 / core::f64::consts::SQRT_2) as isize;
    [(r, 0), (-r, 0), (0, r), (0, -r), (d, d), (d, -d), (-d, d), (-d, -d)]
}

/// NCC between `m(y, x)` and `m(y + dy, x + dx)` over their overlap.
///
/// Each side is mean-subtracted and normalised over the overlap. If either
/// side is constant there the correlation is defined as 1.
pub fn ncc_at_offset(m: &ScalarMap, dx: isize, dy: isize) -> f64 {
    let (h, w) = (m.height() as isize, m.width() as isize);
    let (x0, x1) = ((-dx).max(0), (w - dx).min(w));
    let (y0, y1) = ((-dy).max(0), (h - dy).min(h));
    if x0 >= x1 || y0 >= y1 {
        return 1.0;
    }
    let count = ((x1 - x0) * (y1 - y0)) as f64;
    let (mut sa, mut sb) = (0.0, 0.0);
    let (mut amin, mut amax, mut bmin, mut bmax) = (f32::INFINITY, f32::NEG_INFINITY, f32::INFINITY, f32::NEG_INFINITY);
    for y in y0..y1 {
        for x in x0..x1 {
            let a = m.get(y as usize, x as usize);
            let b = m.get((y + dy) as usize, (x + dx) as usize);
            sa += a as f64;
            sb += b as f64;
            amin = amin.min(a);
            amax = amax.max(a);
            bmin = bmin.min(b);
            bmax = bmax.max(b);
        }
    }
    if amin == amax || bmin == bmax {
        return 1.0;
    }
    let (ma, mb) = (sa / count, sb / count);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for y in y0..y1 {
        for x in x0..x1 {
            let a = m.get(y as usize, x as usize) as f64 - ma;
            let b = m.get((y + dy) as usize, (x + dx) as usize) as f64 - mb;
            sab += a * b;
            saa += a * a;
            sbb += b * b;
        }
    }
    (sab / libm::sqrt(saa * sbb)).clamp(-1.0, 1.0)
}

/// Mean NCC of `m` against itself shifted by about `r` pixels in eight directions.
pub fn shifted_ncc(m: &ScalarMap, r: usize) -> Result<f64> {
    let (h, w) = (m.height(), m.width());
    if r == 0 || 2 * r >= h.min(w) {
        return Err(Error::ShiftTooLarge { radius: r, height: h, width: w });
    }
    Ok(shift_offsets(r).iter().map(|&(dx, dy)| ncc_at_offset(m, dx, dy)).sum::<f64>() / 8.0)
}
