//! Thin-lens defocus synthesis from an all-in-focus image and a depth map.
//!
//! Each pixel gets a blur radius (in pixels) from its depth, and the output is
//! a per-pixel gather: the destination pixel's Gaussian PSF is applied to the
//! source neighborhood. Occlusion effects at depth edges are not modeled.
//! At image borders the kernel is renormalized over in-bounds taps.
//!
//! Kernels are keyed by the radius rounded to [`RADIUS_QUANTUM`] and built
//! once, before the parallel pass. The rounded radius is the one the PSF is
//! evaluated at.

use alloc::collections::btree_map::{BTreeMap, Entry};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::par::for_each_row;
use crate::raster::{check_same_size, CameraParams, DepthMap, RgbImage, ScalarMap};

/// Radii below this (in pixels) use the identity kernel.
pub const MIN_RADIUS: f64 = 0.25;
/// Kernel cache resolution in pixels.
pub const RADIUS_QUANTUM: f64 = 1.0 / 64.0;
/// Default kernel half-width in units of the radius.
pub const DEFAULT_TRUNCATION: f64 = 3.0;

/// Radius-independent factor of the thin-lens blur: `A·f / ((D_fp − f)·√2·p_x)`.
/// It is the limit of [`radius_at`] as depth goes to infinity.
pub fn radius_prefactor(cam: &CameraParams) -> f64 {
    let f = cam.focal_length();
    (1.0 / (SQRT_2 * cam.pixel_pitch())) * (cam.aperture() * f / (cam.focus_distance() - f))
}

/// Blur radius in pixels for a scene point at `depth` meters.
pub fn radius_at(depth: f64, cam: &CameraParams) -> Result<f64> {
    if !(depth > 0.0) || !depth.is_finite() {
        return Err(Error::NonPositiveDepth { index: 0, value: depth });
    }
    Ok(radius_prefactor(cam) * ((depth - cam.focus_distance()).abs() / depth))
}

/// Per-pixel blur radius map. Invalid depth pixels get radius 0.
pub fn blur_radius(depth: &DepthMap, cam: &CameraParams) -> ScalarMap {
    let k = radius_prefactor(cam);
    let dfp = cam.focus_distance();
    let data = depth
        .data()
        .iter()
        .zip(depth.valid())
        .map(|(&d, &ok)| if ok { k * ((d - dfp).abs() / d) } else { 0.0 })
        .collect();
    ScalarMap::from_parts_unchecked(depth.width(), depth.height(), data)
}

/// The radius a kernel is actually built for: `r` rounded to the cache grid.
pub fn quantize_radius(r: f64) -> f64 {
    quantize_key(r) as f64 * RADIUS_QUANTUM
}

fn quantize_key(r: f64) -> u64 {
    libm::round(r / RADIUS_QUANTUM) as u64
}

/// Square, odd-sided, normalized Gaussian kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Psf {
    half_width: usize,
    weights: Vec<f64>,
}

impl Psf {
    pub fn identity() -> Self {
        Self { half_width: 0, weights: vec![1.0] }
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn side(&self) -> usize {
        2 * self.half_width + 1
    }

    /// Row-major weights, `side()²` of them.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at offset `(dx, dy)` from the center.
    pub fn weight(&self, dx: isize, dy: isize) -> f64 {
        let h = self.half_width as isize;
        let side = self.side() as isize;
        self.weights[((dy + h) * side + dx + h) as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.half_width == 0
    }
}

/// Gaussian PSF of standard deviation `r` pixels, truncated at
/// `ceil(truncation·r)` and renormalized to unit sum.
pub fn gaussian_psf(r: f64, truncation: f64) -> Result<Psf> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::NegativeRadius(r));
    }
    if !(truncation > 0.0) || !truncation.is_finite() {
        return Err(Error::InvalidTruncation(truncation));
    }
    if r < MIN_RADIUS {
        return Ok(Psf::identity());
    }
    let h = libm::ceil(truncation * r) as usize;
    let side = 2 * h + 1;
    let inv = 1.0 / (2.0 * r * r);
    let mut weights = Vec::with_capacity(side * side);
    for y in -(h as isize)..=h as isize {
        for x in -(h as isize)..=h as isize {
            let d2 = (x * x + y * y) as f64;
            weights.push(libm::exp(-d2 * inv));
        }
    }
    let z = crate::sum::pairwise_sum(&weights);
    for w in &mut weights {
        *w /= z;
    }
    Ok(Psf { half_width: h, weights })
}

/// Blurs `img` with a per-pixel radius map (pixels).
pub fn synthesize_with_radii(img: &RgbImage, radii: &ScalarMap, truncation: f64) -> Result<RgbImage> {
    check_same_size(img.dims(), radii.dims())?;
    if !(truncation > 0.0) || !truncation.is_finite() {
        return Err(Error::InvalidTruncation(truncation));
    }
    if let Some(&r) = radii.data().iter().find(|&&r| r < 0.0) {
        return Err(Error::NegativeRadius(r));
    }

    let keys: Vec<u64> = radii.data().iter().map(|&r| quantize_key(r)).collect();
    let mut cache: BTreeMap<u64, Psf> = BTreeMap::new();
    for &k in &keys {
        if let Entry::Vacant(e) = cache.entry(k) {
            e.insert(gaussian_psf(k as f64 * RADIUS_QUANTUM, truncation)?);
        }
    }

    let (w, h) = img.dims();
    let src = img.data();
    let mut out = vec![0.0; w * h * 3];
    for_each_row(&mut out, w * 3, |y, row| {
        for x in 0..w {
            let psf = &cache[&keys[y * w + x]];
            let px = gather(src, w, h, x, y, psf);
            row[x * 3..x * 3 + 3].copy_from_slice(&px);
        }
    });
    Ok(RgbImage::from_parts_unchecked(w, h, out))
}

fn gather(src: &[f64], w: usize, h: usize, x: usize, y: usize, psf: &Psf) -> [f64; 3] {
    let i = (y * w + x) * 3;
    if psf.is_identity() {
        return [src[i], src[i + 1], src[i + 2]];
    }
    let hw = psf.half_width;
    let side = psf.side();
    let kw = psf.weights();
    let (x0, x1) = (x.saturating_sub(hw), (x + hw).min(w - 1));
    let (y0, y1) = (y.saturating_sub(hw), (y + hw).min(h - 1));
    let mut acc = [0.0f64; 3];
    let mut wsum = 0.0f64;
    for sy in y0..=y1 {
        // Source (sx, sy) sits at kernel offset (x - sx, y - sy).
        let krow = &kw[(hw + y - sy) * side..][..side];
        let srow = &src[sy * w * 3..(sy + 1) * w * 3];
        for sx in x0..=x1 {
            let k = krow[hw + x - sx];
            let s = &srow[sx * 3..sx * 3 + 3];
            acc[0] += k * s[0];
            acc[1] += k * s[1];
            acc[2] += k * s[2];
            wsum += k;
        }
    }
    acc.map(|a| (a / wsum).clamp(0.0, 1.0))
}

/// Renders the defocused image seen by `cam` for an all-in-focus `img`.
pub fn synthesize_defocus(img: &RgbImage, depth: &DepthMap, cam: &CameraParams, truncation: f64) -> Result<RgbImage> {
    check_same_size(img.dims(), depth.dims())?;
    synthesize_with_radii(img, &blur_radius(depth, cam), truncation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cam() -> CameraParams {
        CameraParams::NYU_SYNTHETIC
    }

    #[test]
    fn radius_anchors() {
        assert_eq!(radius_at(0.7, &cam()).unwrap(), 0.0);
        // 1/(√2·7.5e-6) · (4.5e-3·9e-3/0.691) · 0.5
        let r14 = radius_at(1.4, &cam()).unwrap();
        assert!((r14 - 2.763).abs() < 0.01, "{r14}");
        let r035 = radius_at(0.35, &cam()).unwrap();
        assert!((r035 - 5.526).abs() < 0.01, "{r035}");
        assert!((r035 - radius_prefactor(&cam())).abs() < 1e-12);
        assert!(radius_at(0.0, &cam()).is_err());
        assert!(radius_at(-1.0, &cam()).is_err());
    }

    #[test]
    fn radius_monotone_on_either_side_of_focus() {
        let c = cam();
        let k = radius_prefactor(&c);
        let mut prev = 0.0;
        for cm in 71..=1000 {
            let r = radius_at(cm as f64 / 100.0, &c).unwrap();
            assert!(r > prev && r < k);
            prev = r;
        }
        let mut prev = f64::INFINITY;
        for mm in 100..700 {
            let r = radius_at(mm as f64 / 1000.0, &c).unwrap();
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn invalid_depth_pixels_are_unblurred() {
        let d = DepthMap::from_samples(2, 1, vec![0.0, 1.4]).unwrap();
        let r = blur_radius(&d, &cam());
        assert_eq!(r.data()[0], 0.0);
        assert!(r.data()[1] > 2.7);
    }

    #[test]
    fn psf_identity_below_threshold() {
        assert_eq!(gaussian_psf(0.0, 3.0).unwrap(), Psf::identity());
        assert_eq!(gaussian_psf(0.2499, 3.0).unwrap(), Psf::identity());
        assert!(!gaussian_psf(0.25, 3.0).unwrap().is_identity());
        assert_eq!(gaussian_psf(-0.1, 3.0), Err(Error::NegativeRadius(-0.1)));
        assert_eq!(gaussian_psf(1.0, 0.0), Err(Error::InvalidTruncation(0.0)));
    }

    #[test]
    fn psf_unit_radius_matches_direct_evaluation() {
        let psf = gaussian_psf(1.0, 3.0).unwrap();
        assert_eq!(psf.side(), 7);
        let mut z = 0.0;
        for y in -3i32..=3 {
            for x in -3i32..=3 {
                z += (-((x * x + y * y) as f64) / 2.0).exp();
            }
        }
        for y in -3i32..=3 {
            for x in -3i32..=3 {
                let want = (-((x * x + y * y) as f64) / 2.0).exp() / z;
                assert!((psf.weight(x as isize, y as isize) - want).abs() < 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn psf_normalized_and_peaked(r in MIN_RADIUS..12.0, t in 0.5f64..4.0) {
            let psf = gaussian_psf(r, t).unwrap();
            let s: f64 = psf.weights().iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            let c = psf.weight(0, 0);
            prop_assert!(psf.weights().iter().all(|&w| w <= c));
        }
    }

    #[test]
    fn in_focus_depth_is_exact_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let img = RgbImage::from_fn(12, 9, |_, _| [rng.gen(), rng.gen(), rng.gen()]).unwrap();
        let depth = DepthMap::filled(12, 9, 0.7).unwrap();
        assert_eq!(synthesize_defocus(&img, &depth, &cam(), 3.0).unwrap(), img);
    }

    #[test]
    fn white_stays_white() {
        let img = RgbImage::filled(10, 8, [1.0; 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let depth = DepthMap::from_fn(10, 8, |_, _| rng.gen_range(0.3..10.0)).unwrap();
        let out = synthesize_defocus(&img, &depth, &cam(), 3.0).unwrap();
        assert!(out.data().iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn rejects_mismatch_and_negative_radii() {
        let img = RgbImage::filled(3, 3, [0.5; 3]).unwrap();
        let depth = DepthMap::filled(3, 2, 1.0).unwrap();
        assert!(matches!(synthesize_defocus(&img, &depth, &cam(), 3.0), Err(Error::DimensionMismatch { .. })));
        let radii = ScalarMap::new(3, 3, vec![0.0, 0.0, 0.0, 0.0, -2.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(synthesize_with_radii(&img, &radii, 3.0), Err(Error::NegativeRadius(-2.0)));
    }

    #[test]
    fn quantization_grid() {
        assert_eq!(quantize_radius(0.0), 0.0);
        assert_eq!(quantize_radius(1.0), 1.0);
        assert_eq!(quantize_radius(2.763), 177.0 / 64.0);
        assert!((quantize_radius(3.3333) - 3.3333).abs() <= RADIUS_QUANTUM / 2.0);
    }
}
