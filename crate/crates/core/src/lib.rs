//! Closed-form building blocks for single-image depth-from-defocus with
//! dark-channel cues.
//!
//! The crate is `no_std` + `alloc`. Enable `parallel` to spread per-row work
//! over a rayon pool; results are identical with and without it.
//!
//! * [`raster`]: image, scalar-map, depth-map and camera types.
//! * [`dark_channel`]: windowed channel minimum.
//! * [`cues`]: LDDCV variation map, validity mask and blur/cue profile.
//! * [`synth`]: thin-lens blur radius, Gaussian PSF, spatially varying blur.
//! * [`dct`] and [`losses`]: unnormalized DCT-II and the depth loss terms.
//! * [`metrics`]: the standard depth-estimation error/accuracy suite.
//! * [`kde`]: Gaussian kernel density estimation with Silverman's bandwidth.
// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod cues;
pub mod dark_channel;
pub mod dct;
mod error;
pub mod kde;
pub mod losses;
pub mod metrics;
mod par;
pub mod raster;
pub mod sum;
pub mod synth;

pub use cues::{blur_cue_profile, lddcv, validity_mask, BlurCueProfile, LddcvMap, ProfileBin, ValidityMask};
pub use dark_channel::dark_channel;
pub use error::{Error, Result};
pub use kde::{gaussian_kde, silverman_bandwidth, KdeResult};
pub use losses::LossReport;
pub use metrics::{evaluate, MetricsReport};
pub use raster::{CameraParams, DepthMap, RgbImage, ScalarMap};
pub use synth::{blur_radius, gaussian_psf, synthesize_defocus, Psf};
