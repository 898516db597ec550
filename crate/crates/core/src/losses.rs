//! Depth regression losses: spatial L1, DCT-domain L1, the generator side of a
//! least-squares adversarial loss, and their weighted sum.
//!
//! Both L1 terms are means, not sums, so their scale does not depend on the
//! image size. Discriminator scores are taken as input.

use alloc::vec::Vec;

use crate::dct::dct2;
use crate::error::{Error, Result};
use crate::raster::{check_same_size, DepthMap};
use crate::sum::{mean, pairwise_sum};

pub const FREQ_WEIGHT: f64 = 0.1;
pub const ADV_WEIGHT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LossReport {
    pub l_spafid: f64,
    pub l_freq: f64,
    #[cfg_attr(feature = "serde", serde(skip_serializing_if = "Option::is_none"))]
    pub l_adv: Option<f64>,
    pub l_total: f64,
    pub w_freq: f64,
    pub w_adv: f64,
}

/// Mean absolute depth error over pixels valid in both maps.
pub fn spatial_fidelity(d: &DepthMap, d_gt: &DepthMap) -> Result<f64> {
    check_same_size(d_gt.dims(), d.dims())?;
    let diffs: Vec<f64> = d
        .data()
        .iter()
        .zip(d_gt.data())
        .zip(d.valid().iter().zip(d_gt.valid()))
        .filter(|(_, (a, b))| **a && **b)
        .map(|((p, g), _)| (p - g).abs())
        .collect();
    mean(&diffs).ok_or(Error::NoValidPixels)
}

/// Mean absolute difference of the 2-D DCT-II spectra. Uses every pixel;
/// invalid pixels contribute their stored `0.0`.
pub fn frequency_loss(d: &DepthMap, d_gt: &DepthMap) -> Result<f64> {
    check_same_size(d_gt.dims(), d.dims())?;
    let a = dct2(&d.to_scalar_map());
    let b = dct2(&d_gt.to_scalar_map());
    let diffs: Vec<f64> = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).collect();
    Ok(pairwise_sum(&diffs) / diffs.len() as f64)
}

/// `0.5 · mean((s − 1)²)` over discriminator scores for generated depth.
pub fn adversarial_loss_g(scores: &[f64]) -> Result<f64> {
    let sq: Vec<f64> = scores.iter().map(|s| (s - 1.0) * (s - 1.0)).collect();
    mean(&sq).map(|m| 0.5 * m).ok_or(Error::EmptyScores)
}

/// `l_spafid + 0.1·l_freq + 0.1·l_adv`, with an absent adversarial term counted as 0.
pub fn total_loss(l_spafid: f64, l_freq: f64, l_adv: Option<f64>) -> Result<LossReport> {
    for (term, v) in [("l_spafid", Some(l_spafid)), ("l_freq", Some(l_freq)), ("l_adv", l_adv)] {
        if let Some(v) = v {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::NegativeLoss { term, value: v });
            }
        }
    }
    let l_total = l_spafid + FREQ_WEIGHT * l_freq + ADV_WEIGHT * l_adv.unwrap_or(0.0);
    Ok(LossReport { l_spafid, l_freq, l_adv, l_total, w_freq: FREQ_WEIGHT, w_adv: ADV_WEIGHT })
}

/// All terms for a prediction/ground-truth pair.
pub fn evaluate_losses(d: &DepthMap, d_gt: &DepthMap, scores: Option<&[f64]>) -> Result<LossReport> {
    let l_adv = scores.map(adversarial_loss_g).transpose()?;
    total_loss(spatial_fidelity(d, d_gt)?, frequency_loss(d, d_gt)?, l_adv)
}
