//! Standard single-image depth-estimation metrics.
//!
//! Over ground-truth-valid pixels with `gt <= cap`:
//!
//! | metric   | definition                         |
//! |----------|------------------------------------|
//! | abs_rel  | mean(\|p − g\| / g)                |
//! | sq_rel   | mean((p − g)² / g)                 |
//! | rmse     | sqrt(mean((p − g)²))               |
//! | log_rmse | sqrt(mean((ln p − ln g)²))         |
//! | δᵢ       | fraction with max(p/g, g/p) < 1.25ⁱ |
//!
//! The δ test is evaluated as `p < t·g && g < t·p`, which is the same strict
//! inequality without the rounding of a division.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::raster::{check_same_size, DepthMap, DEFAULT_MAX_DEPTH};
use crate::sum::{mean, pairwise_sum};

pub const DELTA_THRESHOLDS: [f64; 3] = [1.25, 1.25 * 1.25, 1.25 * 1.25 * 1.25];

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub abs_rel: f64,
    pub sq_rel: f64,
    pub rmse: f64,
    pub log_rmse: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub n_pixels: usize,
}

/// Metrics with the default 10 m cap.
pub fn evaluate_default(pred: &DepthMap, gt: &DepthMap) -> Result<MetricsReport> {
    evaluate(pred, gt, DEFAULT_MAX_DEPTH)
}

/// Metrics over pixels valid in `gt` with `gt <= cap`. The prediction must be
/// valid (positive) on every such pixel.
pub fn evaluate(pred: &DepthMap, gt: &DepthMap, cap: f64) -> Result<MetricsReport> {
    evaluate_masked(pred, gt, None, cap)
}

/// As [`evaluate`], additionally restricted to pixels where `mask` is set.
pub fn evaluate_masked(pred: &DepthMap, gt: &DepthMap, mask: Option<&[bool]>, cap: f64) -> Result<MetricsReport> {
    check_same_size(gt.dims(), pred.dims())?;
    if let Some(m) = mask {
        if m.len() != gt.data().len() {
            return Err(Error::DataLength { expected: gt.data().len(), actual: m.len() });
        }
    }

    let n_all = gt.data().len();
    let mut abs_rel = Vec::with_capacity(n_all);
    let mut sq_rel = Vec::with_capacity(n_all);
    let mut sq = Vec::with_capacity(n_all);
    let mut log_sq = Vec::with_capacity(n_all);
    let mut hits = [0usize; 3];

    for i in 0..n_all {
        if !gt.valid()[i] || mask.is_some_and(|m| !m[i]) {
            continue;
        }
        let g = gt.data()[i];
        if g > cap {
            continue;
        }
        if !pred.valid()[i] {
            return Err(Error::NonPositiveDepth { index: i, value: pred.data()[i] });
        }
        let p = pred.data()[i];
        let diff = p - g;
        abs_rel.push(diff.abs() / g);
        sq_rel.push(diff * diff / g);
        sq.push(diff * diff);
        let ld = libm::log(p) - libm::log(g);
        log_sq.push(ld * ld);
        for (hit, t) in hits.iter_mut().zip(DELTA_THRESHOLDS) {
            if p < t * g && g < t * p {
                *hit += 1;
            }
        }
    }

    let n = abs_rel.len();
    if n == 0 {
        return Err(Error::NoValidPixels);
    }
    let nf = n as f64;
    Ok(MetricsReport {
        abs_rel: pairwise_sum(&abs_rel) / nf,
        sq_rel: pairwise_sum(&sq_rel) / nf,
        rmse: libm::sqrt(pairwise_sum(&sq) / nf),
        log_rmse: libm::sqrt(pairwise_sum(&log_sq) / nf),
        delta1: hits[0] as f64 / nf,
        delta2: hits[1] as f64 / nf,
        delta3: hits[2] as f64 / nf,
        n_pixels: n,
    })
}

/// Unweighted mean of per-image reports; `n_pixels` is the total.
pub fn mean_report(reports: &[MetricsReport]) -> Option<MetricsReport> {
    if reports.is_empty() {
        return None;
    }
    let field = |f: fn(&MetricsReport) -> f64| -> f64 {
        let v: Vec<f64> = reports.iter().map(f).collect();
        mean(&v).unwrap_or(0.0)
    };
    Some(MetricsReport {
        abs_rel: field(|r| r.abs_rel),
        sq_rel: field(|r| r.sq_rel),
        rmse: field(|r| r.rmse),
        log_rmse: field(|r| r.log_rmse),
        delta1: field(|r| r.delta1),
        delta2: field(|r| r.delta2),
        delta3: field(|r| r.delta3),
        n_pixels: reports.iter().map(|r| r.n_pixels).sum(),
    })
}
