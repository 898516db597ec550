//! Local variation cues for defocus.
//!
//! The LDDCV map has two channels, in this order:
//!
//! 0. LDCV: local dark-channel variation, computed on the dark channel `J`.
//! 1. LDV: local defocus variation, computed on the color image `I`.
//!
//! Both are the largest absolute difference between a pixel and its 3×3
//! neighbors (clipped at the border). For `I` the difference is taken per
//! color channel and the maximum runs over neighbors and channels. Blur
//! flattens local extrema, so both channels drop as blur grows.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::par::{for_each_row, map_row_blocks};
use crate::raster::{check_same_size, RgbImage, ScalarMap};

/// Default mask threshold on the LDDCV channel maximum.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

/// Two-channel local variation map, stored planar.
#[derive(Debug, Clone, PartialEq)]
pub struct LddcvMap {
    width: usize,
    height: usize,
    ldcv: Vec<f64>,
    ldv: Vec<f64>,
}

impl LddcvMap {
    /// Assembles a map from its two planes; samples must be finite and in `[0, 1]`.
    pub fn from_planes(width: usize, height: usize, ldcv: Vec<f64>, ldv: Vec<f64>) -> Result<Self> {
        // Reuse ScalarMap's extent and finiteness checks.
        let c0 = ScalarMap::new(width, height, ldcv)?;
        let c1 = ScalarMap::new(width, height, ldv)?;
        for (index, &v) in c0.data().iter().chain(c1.data()).enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::SampleOutOfRange { index, value: v });
            }
        }
        Ok(Self { width, height, ldcv: c0.into_data(), ldv: c1.into_data() })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Channel 0, from the dark channel.
    pub fn ldcv(&self) -> &[f64] {
        &self.ldcv
    }

    /// Channel 1, from the color image.
    pub fn ldv(&self) -> &[f64] {
        &self.ldv
    }

    /// Per-pixel maximum of the two channels.
    pub fn channel_max(&self) -> Vec<f64> {
        self.ldcv.iter().zip(&self.ldv).map(|(a, b)| a.max(*b)).collect()
    }
}

/// Binary mask, `true` where the cue magnitude exceeds the threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidityMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl ValidityMask {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn count_set(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// Computes the (LDCV, LDV) map from a dark channel and the image it came from.
pub fn lddcv(dark: &ScalarMap, img: &RgbImage) -> Result<LddcvMap> {
    check_same_size(img.dims(), dark.dims())?;
    let (w, h) = img.dims();

    let mut ldcv = vec![0.0; w * h];
    let j = dark.data();
    for_each_row(&mut ldcv, w, |y, row| {
        for (x, out) in row.iter_mut().enumerate() {
            let c = j[y * w + x];
            let mut m = 0.0f64;
            for (nx, ny) in neighbors(x, y, w, h) {
                m = m.max((c - j[ny * w + nx]).abs());
            }
            *out = m;
        }
    });

    let mut ldv = vec![0.0; w * h];
    let px = img.data();
    for_each_row(&mut ldv, w, |y, row| {
        for (x, out) in row.iter_mut().enumerate() {
            let c = &px[(y * w + x) * 3..][..3];
            let mut m = 0.0f64;
            for (nx, ny) in neighbors(x, y, w, h) {
                let n = &px[(ny * w + nx) * 3..][..3];
                for k in 0..3 {
                    m = m.max((c[k] - n[k]).abs());
                }
            }
            *out = m;
        }
    });

    Ok(LddcvMap { width: w, height: h, ldcv, ldv })
}

/// In-bounds members of the 3×3 neighborhood of `(x, y)`, center included.
fn neighbors(x: usize, y: usize, w: usize, h: usize) -> impl Iterator<Item = (usize, usize)> {
    let xs = x.saturating_sub(1)..=(x + 1).min(w - 1);
    let ys = y.saturating_sub(1)..=(y + 1).min(h - 1);
    ys.flat_map(move |ny| xs.clone().map(move |nx| (nx, ny)))
}

/// Sets a pixel when `max(LDCV, LDV) > threshold`, strictly.
pub fn validity_mask(cues: &LddcvMap, threshold: f64) -> Result<ValidityMask> {
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::InvalidThreshold(threshold));
    }
    let data = cues.ldcv.iter().zip(&cues.ldv).map(|(a, b)| a.max(*b) > threshold).collect();
    Ok(ValidityMask { width: cues.width, height: cues.height, data })
}

/// One bin of normalized blur level.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ProfileBin {
    pub center: f64,
    /// `None` for an empty bin.
    pub mean_ldcv: Option<f64>,
    pub mean_ldv: Option<f64>,
    pub count: usize,
}

/// Mean cue strength as a function of normalized blur level.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BlurCueProfile {
    pub bins: Vec<ProfileBin>,
}

const PROFILE_BLOCK_ROWS: usize = 32;

/// Bins pixels by `radius / max(radius)` into `n_bins` equal-width bins on
/// `[0, 1]` and reports the mean of each cue channel per bin.
///
/// An all-zero radius map yields a single bin centered at 0 holding the
/// global means. Sums are accumulated per fixed block of rows and merged in
/// block order.
pub fn blur_cue_profile(cues: &LddcvMap, radii: &ScalarMap, n_bins: usize) -> Result<BlurCueProfile> {
    check_same_size(cues.dims(), radii.dims())?;
    if n_bins < 2 {
        return Err(Error::TooFewBins(n_bins));
    }
    if let Some(&r) = radii.data().iter().find(|&&r| r < 0.0) {
        return Err(Error::NegativeRadius(r));
    }
    let r_max = radii.max_value();
    let (w, h) = cues.dims();
    let rd = radii.data();

    let (n_out, centers): (usize, Vec<f64>) = if r_max == 0.0 {
        (1, vec![0.0])
    } else {
        (n_bins, (0..n_bins).map(|k| (k as f64 + 0.5) / n_bins as f64).collect())
    };
    let bin_of = |r: f64| -> usize {
        if r_max == 0.0 {
            0
        } else {
            (((r / r_max) * n_bins as f64) as usize).min(n_bins - 1)
        }
    };

    let partials = map_row_blocks(h, PROFILE_BLOCK_ROWS, |rows| {
        let mut acc = vec![(0.0f64, 0.0f64, 0usize); n_out];
        for i in rows.start * w..rows.end * w {
            let slot = &mut acc[bin_of(rd[i])];
            slot.0 += cues.ldcv[i];
            slot.1 += cues.ldv[i];
            slot.2 += 1;
        }
        acc
    });
    let mut total = vec![(0.0f64, 0.0f64, 0usize); n_out];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.0 += p.0;
            t.1 += p.1;
            t.2 += p.2;
        }
    }

    let bins = centers
        .into_iter()
        .zip(total)
        .map(|(center, (s0, s1, count))| {
            let mean = |s: f64| (count > 0).then(|| s / count as f64);
            ProfileBin { center, mean_ldcv: mean(s0), mean_ldv: mean(s1), count }
        })
        .collect();
    Ok(BlurCueProfile { bins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn oracle_ldcv(j: &ScalarMap) -> Vec<f64> {
        let (w, h) = j.dims();
        let mut out = Vec::new();
        for y in 0..h as isize {
            for x in 0..w as isize {
                let c = j.get(x as usize, y as usize);
                let mut m = 0.0f64;
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        let (px, py) = (x + dx, y + dy);
                        if px >= 0 && py >= 0 && px < w as isize && py < h as isize {
                            m = m.max((c - j.get(px as usize, py as usize)).abs());
                        }
                    }
                }
                out.push(m);
            }
        }
        out
    }

    #[test]
    fn constant_inputs_give_zero_cues() {
        let img = RgbImage::filled(5, 4, [0.3, 0.6, 0.9]).unwrap();
        let dark = ScalarMap::filled(5, 4, 0.3).unwrap();
        let cues = lddcv(&dark, &img).unwrap();
        assert!(cues.ldcv().iter().chain(cues.ldv()).all(|&v| v == 0.0));
    }

    #[test]
    fn bright_center_reaches_every_pixel_of_3x3() {
        let dark = ScalarMap::from_fn(3, 3, |x, y| if (x, y) == (1, 1) { 1.0 } else { 0.0 }).unwrap();
        let img = RgbImage::filled(3, 3, [0.5; 3]).unwrap();
        let cues = lddcv(&dark, &img).unwrap();
        assert_eq!(cues.ldcv(), &[1.0; 9]);
        assert_eq!(cues.ldv(), &[0.0; 9]);
        assert_eq!(oracle_ldcv(&dark), vec![1.0; 9]);
    }

    #[test]
    fn single_pixel_is_zero() {
        let img = RgbImage::filled(1, 1, [0.2, 0.4, 0.8]).unwrap();
        let dark = ScalarMap::filled(1, 1, 0.2).unwrap();
        let cues = lddcv(&dark, &img).unwrap();
        assert_eq!((cues.ldcv()[0], cues.ldv()[0]), (0.0, 0.0));
    }

    #[test]
    fn ldv_takes_max_over_channels() {
        let img = RgbImage::from_fn(2, 1, |x, _| if x == 0 { [0.0, 0.0, 0.0] } else { [0.1, 0.7, 0.3] }).unwrap();
        let dark = ScalarMap::filled(2, 1, 0.0).unwrap();
        let cues = lddcv(&dark, &img).unwrap();
        assert_eq!(cues.ldv(), &[0.7, 0.7]);
    }

    #[test]
    fn dimension_mismatch() {
        let img = RgbImage::filled(2, 2, [0.0; 3]).unwrap();
        let dark = ScalarMap::filled(2, 3, 0.0).unwrap();
        assert!(matches!(lddcv(&dark, &img), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn ldcv_matches_oracle_on_random_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dark = ScalarMap::from_fn(13, 9, |_, _| rng.gen()).unwrap();
        let img = RgbImage::filled(13, 9, [0.0; 3]).unwrap();
        assert_eq!(lddcv(&dark, &img).unwrap().ldcv(), oracle_ldcv(&dark).as_slice());
    }

    #[test]
    fn mask_uses_strict_inequality() {
        let cues = LddcvMap::from_planes(3, 1, vec![0.04, 0.0, 0.051], vec![0.0, 0.05, 0.0]).unwrap();
        let mask = validity_mask(&cues, 0.05).unwrap();
        assert_eq!(mask.data(), &[false, false, true]);
        let zero = LddcvMap::from_planes(2, 1, vec![0.0; 2], vec![0.0; 2]).unwrap();
        assert_eq!(validity_mask(&zero, 0.05).unwrap().count_set(), 0);
        let tiny = LddcvMap::from_planes(2, 1, vec![0.0, 1e-9], vec![0.0; 2]).unwrap();
        assert_eq!(validity_mask(&tiny, 0.0).unwrap().data(), &[false, true]);
    }

    #[test]
    fn mask_rejects_bad_threshold() {
        let cues = LddcvMap::from_planes(1, 1, vec![0.0], vec![0.0]).unwrap();
        assert_eq!(validity_mask(&cues, 1.0), Err(Error::InvalidThreshold(1.0)));
        assert_eq!(validity_mask(&cues, -0.1), Err(Error::InvalidThreshold(-0.1)));
    }

    #[test]
    fn profile_all_zero_radii_is_single_global_bin() {
        let cues = LddcvMap::from_planes(2, 2, vec![0.1, 0.2, 0.3, 0.4], vec![0.0, 0.0, 0.2, 0.2]).unwrap();
        let radii = ScalarMap::filled(2, 2, 0.0).unwrap();
        let p = blur_cue_profile(&cues, &radii, 20).unwrap();
        assert_eq!(p.bins.len(), 1);
        let b = p.bins[0];
        assert_eq!((b.center, b.count), (0.0, 4));
        assert!((b.mean_ldcv.unwrap() - 0.25).abs() < 1e-15);
        assert!((b.mean_ldv.unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn profile_constant_cue_and_empty_bins() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (w, h) = (20, 20);
        let cues = LddcvMap::from_planes(w, h, vec![0.3; w * h], vec![0.3; w * h]).unwrap();
        let radii = ScalarMap::from_fn(w, h, |_, _| rng.gen::<f64>()).unwrap();
        let p = blur_cue_profile(&cues, &radii, 10).unwrap();
        assert_eq!(p.bins.len(), 10);
        assert_eq!(p.bins.iter().map(|b| b.count).sum::<usize>(), w * h);
        for b in p.bins.iter().filter(|b| b.count > 0) {
            assert!((b.mean_ldcv.unwrap() - 0.3).abs() < 1e-12);
            assert!((b.mean_ldv.unwrap() - 0.3).abs() < 1e-12);
        }

        let two = ScalarMap::from_fn(4, 1, |x, _| if x < 2 { 0.0 } else { 1.0 }).unwrap();
        let cues = LddcvMap::from_planes(4, 1, vec![0.1; 4], vec![0.1; 4]).unwrap();
        let p = blur_cue_profile(&cues, &two, 4).unwrap();
        assert_eq!(p.bins.iter().map(|b| b.count).collect::<Vec<_>>(), vec![2, 0, 0, 2]);
        assert_eq!(p.bins[1].mean_ldcv, None);
        assert_eq!(p.bins[3].center, 0.875);
    }

    #[test]
    fn profile_errors() {
        let cues = LddcvMap::from_planes(2, 1, vec![0.0; 2], vec![0.0; 2]).unwrap();
        let radii = ScalarMap::filled(2, 1, 1.0).unwrap();
        assert_eq!(blur_cue_profile(&cues, &radii, 1), Err(Error::TooFewBins(1)));
        let bad = ScalarMap::filled(1, 2, 1.0).unwrap();
        assert!(matches!(blur_cue_profile(&cues, &bad, 4), Err(Error::DimensionMismatch { .. })));
        let neg = ScalarMap::new(2, 1, vec![0.0, -1.0]).unwrap();
        assert_eq!(blur_cue_profile(&cues, &neg, 4), Err(Error::NegativeRadius(-1.0)));
    }

    proptest! {
        #[test]
        fn cues_invariant_under_constant_shift(seed in any::<u64>(), shift in 0.0f64..0.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (w, h) = (6, 5);
            let vals: Vec<f64> = (0..w * h * 3).map(|_| rng.gen::<f64>() * 0.5).collect();
            let img = RgbImage::new(w, h, vals.clone()).unwrap();
            let shifted = RgbImage::new(w, h, vals.iter().map(|v| v + shift).collect()).unwrap();
            let dark = img.channel_min();
            let dark_s = shifted.channel_min();
            let a = lddcv(&dark, &img).unwrap();
            let b = lddcv(&dark_s, &shifted).unwrap();
            for i in 0..w * h {
                prop_assert!((a.ldcv()[i] - b.ldcv()[i]).abs() < 1e-12);
                prop_assert!((a.ldv()[i] - b.ldv()[i]).abs() < 1e-12);
            }
        }

        #[test]
        fn mask_monotone_in_threshold(seed in any::<u64>(), t1 in 0.0f64..0.99, dt in 0.0f64..0.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 30;
            let cues = LddcvMap::from_planes(n, 1, (0..n).map(|_| rng.gen()).collect(), (0..n).map(|_| rng.gen()).collect()).unwrap();
            let t2 = (t1 + dt).min(0.999);
            let lo = validity_mask(&cues, t1).unwrap();
            let hi = validity_mask(&cues, t2).unwrap();
            for (a, b) in lo.data().iter().zip(hi.data()) {
                prop_assert!(*a || !*b);
            }
        }
    }
}
