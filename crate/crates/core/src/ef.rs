//! Edge fidelity: edge concentration (EC), near-edge concentration (NC),
//! frequency content (FC), spatial precision (SP) and their scaled product (EF).

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::image_ops::{
    extract_edge_centerlines, hann_power_spectrum, l2_norm_map, make_edge_bands, pca1_map, resize_bilinear,
    shifted_ncc, sobel_gradient, EdgeBands, ScalarMap,
};
use crate::tensor::FeatureTensor;
use crate::{Error, Flag, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EfParams {
    /// Edge-core radius in feature pixels.
    pub r_in: u32,
    /// Outer radius of the near-edge band in feature pixels.
    pub r_out: u32,
    /// Radial frequency cutoff (cycles/pixel, Nyquist 0.5 per axis).
    pub rho_low: f64,
    /// NCC level below which a shift counts as decorrelated.
    pub tau: f64,
    /// Decay of SP per image pixel of `r_tau`.
    pub gamma: f64,
    /// Scale of the composite score.
    pub alpha: f64,
    /// Largest tested shift as a fraction of `min(H, W)`.
    pub radii_cap_fraction: f64,
    pub seed: u64,
}

impl Default for EfParams {
    fn default() -> Self {
        Self {
            r_in: 3,
            r_out: 7,
            rho_low: 0.15,
            tau: 0.5,
            gamma: 1.0 / 64.0,
            alpha: 100.0,
            radii_cap_fraction: 0.25,
            seed: 0,
        }
    }
}

impl EfParams {
    pub fn validate(&self) -> Result<()> {
        if self.r_in == 0 || self.r_in >= self.r_out {
            return Err(Error::BadRadii { r_in: self.r_in, r_out: self.r_out });
        }
        if !(self.rho_low > 0.0 && self.rho_low < core::f64::consts::FRAC_1_SQRT_2) {
            return Err(Error::InvalidParams("rho_low must lie in (0, sqrt(2)/2)"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::InvalidParams("tau must lie in (0, 1)"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParams("gamma must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParams("alpha must be positive"));
        }
        if !(self.radii_cap_fraction > 0.0 && self.radii_cap_fraction < 0.5) {
            return Err(Error::InvalidParams("radii_cap_fraction must lie in (0, 0.5)"));
        }
        Ok(())
    }
}

/// A score together with the degeneracy convention that produced it, if any.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub value: f64,
    pub flag: Option<Flag>,
}

impl Score {
    fn ok(value: f64) -> Self {
        Self { value, flag: None }
    }

    fn degenerate(flag: Flag) -> Self {
        Self { value: 0.0, flag: Some(flag) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfResult {
    pub ec: f64,
    pub nc: f64,
    pub fc: f64,
    pub sp: f64,
    pub ef: f64,
    /// Shift radius at which NCC first fell below tau, in image pixels.
    pub r_tau_px: f64,
    pub flags: Vec<Flag>,
}

fn band_fraction(gradient: &ScalarMap, bands: &EdgeBands, near: bool) -> Result<Score> {
    let shape = (bands.core.height(), bands.core.width());
    let actual = (gradient.height(), gradient.width());
    if shape != actual {
        return Err(Error::ShapeMismatch { expected: shape, actual });
    }
    let total: f64 = gradient.values().iter().map(|v| *v as f64).sum();
    if total <= 0.0 {
        return Ok(Score::degenerate(Flag::ZeroGradient));
    }
    if bands.core.is_empty() {
        return Ok(Score::degenerate(Flag::NoCenterlines));
    }
    let region = if near { &bands.near } else { &bands.core };
    let inside: f64 = gradient.values().iter().zip(region.bits()).filter(|(_, b)| **b).map(|(v, _)| *v as f64).sum();
    Ok(Score::ok((inside / total).clamp(0.0, 1.0)))
}

/// Fraction of gradient energy inside the edge core.
pub fn ec(gradient: &ScalarMap, bands: &EdgeBands) -> Result<Score> {
    band_fraction(gradient, bands, false)
}

/// Fraction of gradient energy in the band between `r_in` and `r_out`.
pub fn nc(gradient: &ScalarMap, bands: &EdgeBands) -> Result<Score> {
    band_fraction(gradient, bands, true)
}

/// Fraction of non-DC spectral power above `rho_low`.
pub fn fc(m: &ScalarMap, rho_low: f64) -> Result<Score> {
    let spectrum = hann_power_spectrum(m)?;
    let total = spectrum.power_above(0.0);
    if total <= 0.0 {
        return Ok(Score::degenerate(Flag::ZeroSpectrum));
    }
    Ok(Score::ok((spectrum.power_above(rho_low) / total).clamp(0.0, 1.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpResult {
    pub sp: f64,
    /// Decorrelation radius in feature pixels.
    pub r_tau: usize,
    pub r_tau_px: f64,
    /// `(radius, mean NCC)` for every tested radius up to the crossing.
    pub curve: Vec<(usize, f64)>,
    pub flag: Option<Flag>,
}

/// Tested shift radii: 1, 2, 4, ... up to `floor(fraction * min(H, W))`.
pub fn test_radii(height: usize, width: usize, fraction: f64) -> (Vec<usize>, usize) {
    let cap = (libm::floor(fraction * height.min(width) as f64) as usize).max(1);
    let mut radii = Vec::new();
    let mut r = 1;
    while r <= cap {
        radii.push(r);
        r *= 2;
    }
    (radii, cap)
}

/// Spatial precision `1 / (1 + gamma * r_tau * stride)`.
pub fn sp(m: &ScalarMap, params: &EfParams, stride: u32) -> Result<SpResult> {
    let (h, w) = (m.height(), m.width());
    if h.min(w) < 8 {
        return Err(Error::TooSmall { height: h, width: w, min: 8 });
    }
    let (radii, cap) = test_radii(h, w, params.radii_cap_fraction);
    let mut curve = Vec::with_capacity(radii.len());
    let mut crossing = None;
    for r in radii {
        let v = shifted_ncc(m, r)?;
        curve.push((r, v));
        if v < params.tau {
            crossing = Some(r);
            break;
        }
    }
    let (r_tau, flag) = match crossing {
        Some(r) => (r, None),
        None => (cap, Some(Flag::NoDecorrelation)),
    };
    let r_tau_px = (r_tau as f64) * stride as f64;
    Ok(SpResult { sp: 1.0 / (1.0 + params.gamma * r_tau_px), r_tau, r_tau_px, curve, flag })
}

/// Maps and masks the EF factors are computed from; exposed for auditing.
#[derive(Debug, Clone)]
pub struct EfInputs {
    pub bands: EdgeBands,
    pub gradient: ScalarMap,
    pub l2: ScalarMap,
    pub pca_constant: bool,
}

/// Builds the centerline bands (from the resized image), the PCA-1 gradient and the L2 map.
pub fn ef_inputs(tensor: &FeatureTensor, image: &ScalarMap, params: &EfParams) -> Result<EfInputs> {
    let (h, w) = (tensor.height(), tensor.width());
    let resized = resize_bilinear(image, h, w);
    let centerlines = extract_edge_centerlines(&resized)?;
    let bands = make_edge_bands(&centerlines, params.r_in, params.r_out)?;
    let pca = pca1_map(tensor, params.seed)?;
    let gradient = sobel_gradient(&pca.map)?;
    Ok(EfInputs { bands, gradient, l2: l2_norm_map(tensor), pca_constant: pca.constant })
}

/// Composite edge fidelity `alpha * EC * NC * FC * SP` for one stride.
pub fn ef(tensor: &FeatureTensor, image: &ScalarMap, params: &EfParams) -> Result<EfResult> {
    params.validate()?;
    let inputs = ef_inputs(tensor, image, params)?;
    let ec_score = ec(&inputs.gradient, &inputs.bands)?;
    let nc_score = nc(&inputs.gradient, &inputs.bands)?;
    let fc_score = fc(&inputs.l2, params.rho_low)?;
    let sp_result = sp(&inputs.l2, params, tensor.stride())?;

    let mut flags = Vec::new();
    if inputs.pca_constant {
        flags.push(Flag::PcaConstant);
    }
    if inputs.bands.centerlines.is_empty() {
        flags.push(Flag::NoCenterlines);
    }
    for f in [ec_score.flag, fc_score.flag, sp_result.flag].into_iter().flatten() {
        if !flags.contains(&f) {
            flags.push(f);
        }
    }
    Ok(EfResult {
        ec: ec_score.value,
        nc: nc_score.value,
        fc: fc_score.value,
        sp: sp_result.sp,
        ef: composite(params.alpha, ec_score.value, nc_score.value, fc_score.value, sp_result.sp),
        r_tau_px: sp_result.r_tau_px,
        flags,
    })
}

pub fn composite(alpha: f64, ec: f64, nc: f64, fc: f64, sp: f64) -> f64 {
    alpha * ec * nc * fc * sp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image_ops::{dilate_disc, Mask};

    fn line_bands(h: usize, w: usize, col: usize, r_in: u32, r_out: u32) -> EdgeBands {
        let e = Mask::from_fn(h, w, |_, x| x == col);
        make_edge_bands(&e, r_in, r_out).unwrap()
    }

    #[test]
    fn gradient_on_centerline() {
        let bands = line_bands(16, 32, 10, 3, 7);
        let g = ScalarMap::from_fn(16, 32, |_, x| if x == 10 { 2.0 } else { 0.0 }).unwrap();
        assert_eq!(ec(&g, &bands).unwrap().value, 1.0);
        assert_eq!(nc(&g, &bands).unwrap().value, 0.0);
    }

    #[test]
    fn gradient_outside_bands() {
        let bands = line_bands(16, 32, 5, 3, 7);
        let g = ScalarMap::from_fn(16, 32, |_, x| if x > 20 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(ec(&g, &bands).unwrap().value, 0.0);
        assert_eq!(nc(&g, &bands).unwrap().value, 0.0);
    }

    #[test]
    fn gradient_in_near_band() {
        let bands = line_bands(16, 32, 10, 3, 7);
        let g = ScalarMap::from_fn(16, 32, |_, x| if x == 15 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(nc(&g, &bands).unwrap().value, 1.0);
        assert_eq!(ec(&g, &bands).unwrap().value, 0.0);
    }

    #[test]
    fn uniform_gradient_matches_pixel_counts() {
        let bands = line_bands(16, 32, 10, 3, 7);
        let g = ScalarMap::raw(16, 32, alloc::vec![1.0; 512]).unwrap();
        let e = Mask::from_fn(16, 32, |_, x| x == 10);
        let core = dilate_disc(&e, 3).count() as f64;
        let outer = dilate_disc(&e, 7).count() as f64;
        assert!((ec(&g, &bands).unwrap().value - core / 512.0).abs() < 1e-12);
        assert!((nc(&g, &bands).unwrap().value - (outer - core) / 512.0).abs() < 1e-12);
    }

    #[test]
    fn zero_gradient_and_no_centerlines() {
        let bands = line_bands(8, 8, 3, 1, 2);
        let g = ScalarMap::raw(8, 8, alloc::vec![0.0; 64]).unwrap();
        assert_eq!(ec(&g, &bands).unwrap(), Score::degenerate(Flag::ZeroGradient));
        let empty = make_edge_bands(&Mask::empty(8, 8), 1, 2).unwrap();
        let g = ScalarMap::raw(8, 8, alloc::vec![1.0; 64]).unwrap();
        assert_eq!(nc(&g, &empty).unwrap(), Score::degenerate(Flag::NoCenterlines));
        let wrong = ScalarMap::raw(4, 8, alloc::vec![1.0; 32]).unwrap();
        assert!(matches!(ec(&wrong, &bands), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn fc_constant_is_degenerate() {
        let m = ScalarMap::raw(16, 16, alloc::vec![0.0; 256]).unwrap();
        assert_eq!(fc(&m, 0.15).unwrap(), Score::degenerate(Flag::ZeroSpectrum));
    }

    #[test]
    fn sp_checkerboard_at_stride_16() {
        let m = ScalarMap::from_fn(32, 32, |y, x| if (x + y) % 2 == 0 { 1.0 } else { -1.0 }).unwrap().zscore();
        let r = sp(&m, &EfParams::default(), 16).unwrap();
        assert_eq!(r.r_tau, 1);
        assert!((r.sp - 0.8).abs() < 1e-12);
    }

    #[test]
    fn sp_constant_uses_cap() {
        let m = ScalarMap::raw(32, 40, alloc::vec![0.0; 32 * 40]).unwrap();
        let p = EfParams::default();
        let r = sp(&m, &p, 8).unwrap();
        assert_eq!(r.r_tau, 8);
        assert_eq!(r.flag, Some(Flag::NoDecorrelation));
        assert!((r.sp - 1.0 / (1.0 + p.gamma * 8.0 * 8.0)).abs() < 1e-12);
        assert_eq!(r.curve.iter().map(|c| c.0).collect::<Vec<_>>(), alloc::vec![1, 2, 4, 8]);
    }

    #[test]
    fn radii_grid() {
        assert_eq!(test_radii(8, 8, 0.25), (alloc::vec![1, 2], 2));
        assert_eq!(test_radii(40, 100, 0.25), (alloc::vec![1, 2, 4, 8], 10));
    }

    #[test]
    fn params_validation() {
        assert!(EfParams::default().validate().is_ok());
        assert!(EfParams { r_in: 7, ..EfParams::default() }.validate().is_err());
        assert!(EfParams { tau: 1.0, ..EfParams::default() }.validate().is_err());
        assert!(EfParams { rho_low: 0.8, ..EfParams::default() }.validate().is_err());
    }
}
