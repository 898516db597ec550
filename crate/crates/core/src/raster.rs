//! Raster and camera types shared by every stage.
//!
//! All rasters are row-major with a top-left origin; pixel `(x, y)` lives at
//! index `y * width + x`. Samples are `f64`. Color images are normalized to
//! `[0, 1]`, which keeps the fixed cue thresholds independent of bit depth.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

fn check_extent(width: usize, height: usize, len: usize, channels: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::EmptyRaster);
    }
    let expected = width * height * channels;
    if len != expected {
        return Err(Error::DataLength { expected, actual: len });
    }
    Ok(())
}

pub(crate) fn check_same_size(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// Three-channel (R, G, B) image with interleaved samples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_extent(width, height, data.len(), 3)?;
        for (index, &v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::SampleOutOfRange { index, value: v });
            }
        }
        Ok(Self { width, height, data })
    }

    /// Builds an image from a per-pixel closure returning `[r, g, b]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Result<Self> {
        Self::from_fn(width, height, |_, _| rgb)
    }

    /// Only for producers that already guarantee the invariants.
    pub(crate) fn from_parts_unchecked(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height * 3);
        Self { width, height, data }
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

    /// Interleaved samples, `[r0, g0, b0, r1, ...]`.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Per-pixel minimum over the three channels.
    pub fn channel_min(&self) -> ScalarMap {
        let data = self.data.chunks_exact(3).map(|p| p[0].min(p[1]).min(p[2])).collect();
        ScalarMap::from_parts_unchecked(self.width, self.height, data)
    }

    /// Mirrors the image left to right.
    pub fn flip_horizontal(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.data.chunks_exact(self.width * 3) {
            for px in row.chunks_exact(3).rev() {
                data.extend_from_slice(px);
            }
        }
        Self::from_parts_unchecked(self.width, self.height, data)
    }
}

/// Single-channel map of finite samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ScalarMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_extent(width, height, data.len(), 1)?;
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub(crate) fn from_parts_unchecked(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self { width, height, data }
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn flip_horizontal(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for row in self.data.chunks_exact(self.width) {
            data.extend(row.iter().rev());
        }
        Self::from_parts_unchecked(self.width, self.height, data)
    }
}

/// Metric depth in meters with a per-pixel validity flag.
///
/// Valid pixels hold finite depths `> 0`. Invalid pixels (sensor holes, raw
/// value zero on disk) hold `0.0` and are skipped by every statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
    valid: Vec<bool>,
}

/// Default depth cap in meters, the full NYU-v2 range.
pub const DEFAULT_MAX_DEPTH: f64 = 10.0;

impl DepthMap {
    /// All pixels valid; every depth must be finite and `> 0`.
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        let valid = vec![true; data.len()];
        Self::with_validity(width, height, data, valid)
    }

    pub fn filled(width: usize, height: usize, depth: f64) -> Result<Self> {
        Self::new(width, height, vec![depth; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    /// Explicit validity flags. Depths at invalid pixels are ignored and
    /// replaced by `0.0`.
    pub fn with_validity(width: usize, height: usize, mut data: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        check_extent(width, height, data.len(), 1)?;
        if valid.len() != data.len() {
            return Err(Error::DataLength { expected: data.len(), actual: valid.len() });
        }
        for (index, (v, &ok)) in data.iter_mut().zip(&valid).enumerate() {
            if !ok {
                *v = 0.0;
                continue;
            }
            if !v.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if *v <= 0.0 {
                return Err(Error::NonPositiveDepth { index, value: *v });
            }
        }
        Ok(Self { width, height, data, valid })
    }

    /// Decodes stored samples: exact zeros become invalid pixels, anything
    /// else must be a finite positive depth.
    pub fn from_samples(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        let valid = data.iter().map(|&v| v != 0.0).collect();
        Self::with_validity(width, height, data, valid)
    }

    /// Rejects valid depths above `cap` meters (the cap itself is accepted).
    pub fn check_cap(&self, cap: f64) -> Result<()> {
        for (index, (&v, &ok)) in self.data.iter().zip(&self.valid).enumerate() {
            if ok && v > cap {
                return Err(Error::DepthAboveCap { index, value: v, cap });
            }
        }
        Ok(())
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

    /// Depth samples; invalid pixels read `0.0`.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn is_valid(&self, x: usize, y: usize) -> bool {
        self.valid[y * self.width + x]
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Depth values of valid pixels in raster order.
    pub fn valid_values(&self) -> Vec<f64> {
        self.data.iter().zip(&self.valid).filter_map(|(&v, &ok)| ok.then_some(v)).collect()
    }

    /// Samples as a plain map, invalid pixels as `0.0`.
    pub fn to_scalar_map(&self) -> ScalarMap {
        ScalarMap::from_parts_unchecked(self.width, self.height, self.data.clone())
    }

    pub fn flip_horizontal(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        let mut valid = Vec::with_capacity(self.valid.len());
        for (row, vrow) in self.data.chunks_exact(self.width).zip(self.valid.chunks_exact(self.width)) {
            data.extend(row.iter().rev());
            valid.extend(vrow.iter().rev());
        }
        Self { width: self.width, height: self.height, data, valid }
    }

    /// Multiplies every valid depth by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let data = self.data.iter().map(|v| v * s).collect();
        Self::with_validity(self.width, self.height, data, self.valid.clone())
    }
}

/// Thin-lens camera constants, all lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CameraParams {
    focal_length: f64,
    f_number: f64,
    focus_distance: f64,
    pixel_pitch: f64,
}

impl CameraParams {
    /// 9 mm lens at f/2 focused at 0.7 m on a 7.5 µm pixel grid.
    pub const NYU_SYNTHETIC: CameraParams =
        CameraParams { focal_length: 0.009, f_number: 2.0, focus_distance: 0.7, pixel_pitch: 7.5e-6 };

    pub fn new(focal_length: f64, f_number: f64, focus_distance: f64, pixel_pitch: f64) -> Result<Self> {
        let all_finite = [focal_length, f_number, focus_distance, pixel_pitch].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidCamera("all parameters must be finite"));
        }
        if focal_length <= 0.0 {
            return Err(Error::InvalidCamera("focal length must be > 0"));
        }
        if f_number <= 0.0 {
            return Err(Error::InvalidCamera("F-number must be > 0"));
        }
        if pixel_pitch <= 0.0 {
            return Err(Error::InvalidCamera("pixel pitch must be > 0"));
        }
        if focus_distance <= focal_length {
            return Err(Error::InvalidCamera("focus distance must exceed the focal length"));
        }
        Ok(Self { focal_length, f_number, focus_distance, pixel_pitch })
    }

    pub fn focal_length(&self) -> f64 {
        self.focal_length
    }

    pub fn f_number(&self) -> f64 {
        self.f_number
    }

    pub fn focus_distance(&self) -> f64 {
        self.focus_distance
    }

    pub fn pixel_pitch(&self) -> f64 {
        self.pixel_pitch
    }

    /// Aperture diameter `f / F_n`.
    pub fn aperture(&self) -> f64 {
        self.focal_length / self.f_number
    }
}

impl Default for CameraParams {
    fn default() -> Self {
        Self::NYU_SYNTHETIC
    }
}
